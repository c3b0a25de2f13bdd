/*
 * Copyright 2026 The steglab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STEGLAB_ERRORS_HPP
#define STEGLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace steglab {

// Error taxonomy maps onto CLI exit codes:
//   usage_error -> 1, data_error -> 2, numeric_error -> 3.

/// Invalid arguments, out-of-range hyperparameters, malformed requests.
class usage_error : public std::runtime_error {
public:
  explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Missing or malformed files, incompatible corpora or checkpoints.
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite losses or values where finite ones are required.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace steglab

#endif
