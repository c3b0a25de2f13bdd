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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "steglab/errors.hpp"
#include "steglab/image.hpp"
#include "steglab/networks.hpp"
#include "steglab/params.hpp"
#include "steglab/rng.hpp"
#include "steglab/stego.hpp"
#include "steglab/trainer.hpp"

namespace py = pybind11;
using namespace steglab;

namespace {

PixelImage image_from_array(const py::array_t<uint8_t>& a) {
  const py::buffer_info info = a.request();
  if (info.ndim != 2 && info.ndim != 3)
    throw usage_error("image array must be HxW or HxWxC");
  const int h = static_cast<int>(info.shape[0]);
  const int w = static_cast<int>(info.shape[1]);
  const int c = info.ndim == 3 ? static_cast<int>(info.shape[2]) : 1;
  if (c != 1 && c != 3) throw usage_error("channel count must be 1 or 3");
  PixelImage img(w, h, c);
  const auto view = a.unchecked();
  if (info.ndim == 2) {
    auto v2 = a.unchecked<2>();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(x, y, 0) = v2(y, x);
  } else {
    (void)view;
    auto v3 = a.unchecked<3>();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < c; ++ch) img.at(x, y, ch) = v3(y, x, ch);
  }
  return img;
}

py::array_t<uint8_t> array_from_image(const PixelImage& img) {
  py::array_t<uint8_t> a(
      {static_cast<py::ssize_t>(img.height),
       static_cast<py::ssize_t>(img.width),
       static_cast<py::ssize_t>(img.channels)});
  std::memcpy(a.mutable_data(), img.data.data(), img.data.size());
  return a;
}

Tensor4 tensor_from_array(const py::array_t<double>& a) {
  const py::buffer_info info = a.request();
  if (info.ndim != 4) throw usage_error("tensor array must be NxCxHxW");
  Tensor4 t(static_cast<int>(info.shape[0]), static_cast<int>(info.shape[1]),
            static_cast<int>(info.shape[2]), static_cast<int>(info.shape[3]));
  auto v = a.unchecked<4>();
  size_t i = 0;
  for (py::ssize_t n = 0; n < info.shape[0]; ++n)
    for (py::ssize_t c = 0; c < info.shape[1]; ++c)
      for (py::ssize_t y = 0; y < info.shape[2]; ++y)
        for (py::ssize_t x = 0; x < info.shape[3]; ++x) t.v[i++] = v(n, c, y, x);
  return t;
}

py::array_t<double> array_from_tensor(const Tensor4& t) {
  py::array_t<double> a({static_cast<py::ssize_t>(t.n),
                         static_cast<py::ssize_t>(t.c),
                         static_cast<py::ssize_t>(t.h),
                         static_cast<py::ssize_t>(t.w)});
  std::memcpy(a.mutable_data(), t.v.data(), t.v.size() * sizeof(double));
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "steglab core operations";

  py::register_exception<usage_error>(m, "UsageError", PyExc_ValueError);
  py::register_exception<data_error>(m, "DataError", PyExc_IOError);
  py::register_exception<numeric_error>(m, "NumericError",
                                        PyExc_ArithmeticError);

  m.def("load_png",
        [](const std::string& path) { return array_from_image(load_png(path)); },
        py::arg("path"));
  m.def("save_png",
        [](const py::array_t<uint8_t>& img, const std::string& path) {
          save_png(image_from_array(img), path);
        },
        py::arg("image"), py::arg("path"));

  m.def("capacity",
        [](const py::array_t<uint8_t>& img, double payload) {
          return capacity(image_from_array(img), payload);
        },
        py::arg("image"), py::arg("payload") = 0.4);
  m.def("embed",
        [](const py::array_t<uint8_t>& cover, const std::vector<uint8_t>& bits,
           uint64_t key) {
          return array_from_image(
              embed(image_from_array(cover), bits, StegoKey{key}));
        },
        py::arg("cover"), py::arg("bits"), py::arg("key"));
  m.def("extract",
        [](const py::array_t<uint8_t>& stego, uint64_t key, size_t n_bits) {
          return extract(image_from_array(stego), StegoKey{key}, n_bits);
        },
        py::arg("stego"), py::arg("key"), py::arg("n_bits"));
  m.def("random_bits",
        [](size_t n, uint64_t seed) {
          Rng rng = Rng::stream(seed, rng_tag::messages);
          return random_bits(n, rng);
        },
        py::arg("n"), py::arg("seed"));

  m.def("hpf_residual",
        [](const py::array_t<double>& x) {
          return array_from_tensor(hpf_residual(tensor_from_array(x)));
        },
        py::arg("images"),
        "Residual of the frozen high-pass filter over NxCxHxW images in "
        "[-1, 1].");

  m.def("generate",
        [](const std::string& checkpoint, int n, uint64_t seed) {
          const Checkpoint ck = load_checkpoint(checkpoint);
          py::list out;
          for (const PixelImage& img : generate(ck, n, seed))
            out.append(array_from_image(img));
          return out;
        },
        py::arg("checkpoint"), py::arg("n"), py::arg("seed"),
        "Sample n images from a checkpointed generator.");

  m.def("joint_loss",
        [](const std::vector<double>& d_real, const std::vector<double>& d_fake,
           const std::vector<double>& s_stego,
           const std::vector<double>& s_cover, double alpha) {
          const JointLoss j = joint_loss(d_real, d_fake, s_stego, s_cover, alpha);
          return py::make_tuple(j.j_total, j.j_adversarial, j.j_stego);
        },
        py::arg("d_real"), py::arg("d_fake"), py::arg("s_stego"),
        py::arg("s_cover"), py::arg("alpha") = 0.85);

  m.def("default_config_json",
        []() { return training_config_to_json(TrainingConfig{}); });
  m.def("desk_config_json",
        []() { return training_config_to_json(desk_config()); });
  m.def("parse_config_json", [](const std::string& text) {
    return training_config_to_json(training_config_from_json(text));
  });
}
