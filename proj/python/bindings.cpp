// SPDX-License-Identifier: Apache-2.0
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "csiauth/calib.hpp"
#include "csiauth/config.hpp"
#include "csiauth/features.hpp"
#include "csiauth/harness.hpp"
#include "csiauth/ingest.hpp"
#include "csiauth/metrics.hpp"
#include "csiauth/synth.hpp"
#include "csiauth/version.hpp"

namespace py = pybind11;
using namespace csiauth;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

CsiMatrix to_matrix(const ComplexArray& a, std::optional<std::vector<double>> freqs) {
  if (a.ndim() != 2) throw py::value_error("csi must be a 2-D array (subcarriers x samples)");
  const auto K = static_cast<std::size_t>(a.shape(0));
  const auto T = static_cast<std::size_t>(a.shape(1));
  std::vector<double> f;
  if (freqs) {
    f = std::move(*freqs);
  } else {
    f.resize(K);
    for (std::size_t k = 0; k < K; ++k) f[k] = 5.16e9 + 312.5e3 * static_cast<double>(k);
  }
  CsiMatrix m(K, T, std::move(f));
  auto r = a.unchecked<2>();
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t) m(k, t) = r(k, t);
  return m;
}

ComplexArray to_array(const CsiMatrix& m) {
  ComplexArray out({m.subcarriers(), m.samples()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < m.subcarriers(); ++k)
    for (std::size_t t = 0; t < m.samples(); ++t) w(k, t) = m(k, t);
  return out;
}

}  // namespace

PYBIND11_MODULE(_csiauth, m) {
  m.doc() = "Wi-Fi CSI biometric authentication toolkit";
  m.attr("__version__") = std::string(kToolVersion);

  py::exception<Error>(m, "CsiauthError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto cls = py::module_::import("csiauth._csiauth").attr("CsiauthError");
      py::set_error(cls, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("feature_names", [] { return features::enabled_feature_names({}); },
        "Names of every feature in extraction order.");

  m.def(
      "extract_features",
      [](const ComplexArray& csi, std::optional<std::vector<double>> freqs) {
        const auto fv = features::extract_all(to_matrix(csi, std::move(freqs)));
        py::dict out;
        for (std::size_t i = 0; i < fv.names.size(); ++i) out[py::str(fv.names[i])] = fv.values[i];
        return out;
      },
      py::arg("csi"), py::arg("freqs") = py::none());

  m.def(
      "calibrate",
      [](const ComplexArray& csi, std::optional<std::vector<double>> freqs) {
        return to_array(calib::calibrate(to_matrix(csi, std::move(freqs))).matrix);
      },
      py::arg("csi"), py::arg("freqs") = py::none(),
      "CFO removal, unwrapping, detrending and normalization; amplitudes unchanged.");

  m.def(
      "eer",
      [](const std::vector<double>& genuine, const std::vector<double>& impostor) {
        const auto r = metrics::eer(genuine, impostor);
        return py::make_tuple(r.eer, r.threshold);
      },
      py::arg("genuine"), py::arg("impostor"), "Returns (eer, threshold).");
  m.def("auc", [](const std::vector<double>& g, const std::vector<double>& i) { return metrics::auc(g, i); },
        py::arg("genuine"), py::arg("impostor"));
  m.def("gini", [](const std::vector<double>& x) { return metrics::gini(x).value; }, py::arg("x"));

  m.def("default_config", [] { return config::to_json(config::default_config()).dump(2); },
        "Effective default configuration as JSON text.");

  m.def(
      "synth_dataset",
      [](const std::string& config_json, const std::string& out_dir) {
        const auto c = config::from_json(nlohmann::json::parse(config_json));
        const auto d = synth::generate_dataset(config::effective_scenario(c));
        ingest::write_dataset_dir(d, out_dir);
        return d.records.size();
      },
      py::arg("config_json"), py::arg("out_dir"), "Writes a synthetic dataset directory; returns the record count.");

  m.def(
      "run_cv",
      [](const std::string& config_json, std::size_t window, const std::string& split_mode) {
        const auto c = config::from_json(nlohmann::json::parse(config_json));
        const auto d = synth::generate_dataset(config::effective_scenario(c));
        const auto p = config::protocol_for(c, window, harness::split_mode_from_string(split_mode));
        harness::RunResult r;
        {
          py::gil_scoped_release release;
          r = harness::run_cv(d, p, config::effective_models(c));
        }
        py::list models;
        for (const auto& mr : r.models) {
          py::dict row;
          row["model"] = mr.name;
          row["accuracy"] = mr.report.aggregate.accuracy;
          row["mean_eer"] = mr.report.mean_eer;
          row["roc_auc"] = mr.report.auc.macro;
          models.append(row);
        }
        py::dict out;
        out["windows"] = r.windows;
        out["folds"] = r.folds;
        out["models"] = models;
        if (r.leakage) out["leakage_delta"] = r.leakage->delta;
        return out;
      },
      py::arg("config_json"), py::arg("window") = 50, py::arg("split_mode") = "per_acquisition_holdout",
      "Cross-validates the configured models on the configured synthetic scenario.");
}
