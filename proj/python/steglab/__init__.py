# Copyright 2026 The steglab authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python face of the steglab core.

The heavy lifting lives in the compiled ``steglab._core`` module; this
package re-exports the stable surface.
"""

from steglab._core import (
    DataError,
    NumericError,
    UsageError,
    capacity,
    default_config_json,
    desk_config_json,
    embed,
    extract,
    generate,
    hpf_residual,
    joint_loss,
    load_png,
    parse_config_json,
    random_bits,
    save_png,
)

__all__ = [
    "DataError",
    "NumericError",
    "UsageError",
    "capacity",
    "default_config_json",
    "desk_config_json",
    "embed",
    "extract",
    "generate",
    "hpf_residual",
    "joint_loss",
    "load_png",
    "parse_config_json",
    "random_bits",
    "save_png",
]

__version__ = "0.1.0"
