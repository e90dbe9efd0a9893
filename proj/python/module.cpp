#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qav/calib.hpp"
#include "qav/dataio.hpp"
#include "qav/embedding.hpp"
#include "qav/error.hpp"
#include "qav/fuse.hpp"
#include "qav/metrics.hpp"
#include "qav/qscore.hpp"
#include "qav/synth.hpp"

namespace py = pybind11;
using namespace qav;

namespace {

ScoreSet score_set(std::vector<double> genuine, std::vector<double> imposter) {
  return ScoreSet(std::move(genuine), std::move(imposter));
}

}  // namespace

PYBIND11_MODULE(_qav, m) {
  m.doc() = "Quality-aware comparison scores: scoring, metrics, calibration, fusion and I/O";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> qav_error(m, "QavError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = qav_error;
      PyErr_SetObject(err.ptr(), py::make_tuple(std::string(e.what()), std::string(to_string(e.code()))).ptr());
    }
  });

  py::class_<WeightParams>(m, "WeightParams")
      .def(py::init<>())
      .def(py::init([](double alpha, double beta) { return WeightParams{alpha, beta}; }), py::arg("alpha"),
           py::arg("beta"))
      .def_readwrite("alpha", &WeightParams::alpha)
      .def_readwrite("beta", &WeightParams::beta)
      .def("zero_crossing", &WeightParams::zero_crossing)
      .def("__eq__", [](const WeightParams& a, const WeightParams& b) { return a == b; })
      .def("__repr__", [](const WeightParams& p) {
        return "WeightParams(alpha=" + format_double(p.alpha) + ", beta=" + format_double(p.beta) + ")";
      });
  m.attr("REFERENCE_PARAMS_100") = kReferenceParams100;

  py::class_<Embedding>(m, "Embedding")
      .def(py::init([](std::vector<double> v, std::string id, std::optional<std::string> subject) {
             return Embedding{std::move(v), std::move(id), std::move(subject)};
           }),
           py::arg("vector"), py::arg("sample_id"), py::arg("subject_id") = py::none())
      .def_readwrite("vector", &Embedding::vector)
      .def_readwrite("sample_id", &Embedding::sample_id)
      .def_readwrite("subject_id", &Embedding::subject_id);

  m.def("decompose", [](const std::vector<double>& v) {
    const auto q = decompose(v);
    return py::make_tuple(q.direction, q.quality);
  }, py::arg("vector"), "(direction, quality) of a raw embedding");
  m.def("cosine", [](const std::vector<double>& a, const std::vector<double>& b) { return cosine(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("weight", &weight, py::arg("s"), py::arg("params"));
  m.def("qa_score", &qa_score, py::arg("s"), py::arg("q1"), py::arg("q2"), py::arg("params"));
  m.def("qa_scores", [](const std::vector<double>& s, const std::vector<double>& q_min, const WeightParams& p) {
    if (s.size() != q_min.size()) throw Error(ErrorCode::dimension_mismatch, "scores and qualities differ in length");
    std::vector<ScoredPair> pairs(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) pairs[i] = {s[i], q_min[i], Label::imposter, "", ""};
    return qa_score_batch(pairs, p);
  }, py::arg("scores"), py::arg("q_min"), py::arg("params"));
  m.def("scaled_score", &scaled_score, py::arg("omega"), py::arg("s"), py::arg("q_min"),
        py::arg("use_sigmoid") = true);

  m.def("fmr_at", [](double t, std::vector<double> g, std::vector<double> i) {
    return fmr_at(t, score_set(std::move(g), std::move(i)));
  }, py::arg("t"), py::arg("genuine"), py::arg("imposter"));
  m.def("fnmr_at", [](double t, std::vector<double> g, std::vector<double> i) {
    return fnmr_at(t, score_set(std::move(g), std::move(i)));
  }, py::arg("t"), py::arg("genuine"), py::arg("imposter"));
  m.def("threshold_at_fmr", [](double f, std::vector<double> g, std::vector<double> i) {
    return threshold_at_fmr(f, score_set(std::move(g), std::move(i)));
  }, py::arg("fmr"), py::arg("genuine"), py::arg("imposter"));
  m.def("eer", [](std::vector<double> g, std::vector<double> i) {
    const auto e = eer(score_set(std::move(g), std::move(i)));
    return py::make_tuple(e.eer, e.threshold);
  }, py::arg("genuine"), py::arg("imposter"), "(eer, threshold)");
  m.def("roc_auc", [](std::vector<double> g, std::vector<double> i) {
    return roc_auc(score_set(std::move(g), std::move(i)));
  }, py::arg("genuine"), py::arg("imposter"));

  py::class_<ComparisonSet>(m, "ComparisonSet")
      .def(py::init([](const std::vector<double>& s, const std::vector<double>& q_min, const std::vector<bool>& genuine) {
             if (s.size() != q_min.size() || s.size() != genuine.size()) {
               throw Error(ErrorCode::dimension_mismatch, "scores, qualities and labels differ in length");
             }
             std::vector<ScoredPair> pairs(s.size());
             for (std::size_t i = 0; i < s.size(); ++i) {
               pairs[i] = {s[i], q_min[i], genuine[i] ? Label::genuine : Label::imposter, "", ""};
             }
             return ComparisonSet(std::move(pairs));
           }),
           py::arg("scores"), py::arg("q_min"), py::arg("genuine"))
      .def("__len__", &ComparisonSet::size)
      .def_property_readonly("genuine_count", &ComparisonSet::genuine_count)
      .def_property_readonly("imposter_count", &ComparisonSet::imposter_count)
      .def_property_readonly("scores", [](const ComparisonSet& c) {
        std::vector<double> v;
        for (const auto& p : c.pairs()) v.push_back(p.raw_score);
        return v;
      })
      .def_property_readonly("q_min", [](const ComparisonSet& c) {
        std::vector<double> v;
        for (const auto& p : c.pairs()) v.push_back(p.q_min);
        return v;
      })
      .def_property_readonly("genuine", [](const ComparisonSet& c) {
        std::vector<bool> v;
        for (const auto& p : c.pairs()) v.push_back(p.label == Label::genuine);
        return v;
      });

  py::class_<CalibConfig>(m, "CalibConfig")
      .def(py::init<>())
      .def_readwrite("fmr_max", &CalibConfig::fmr_max)
      .def_readwrite("fmr_min", &CalibConfig::fmr_min)
      .def_readwrite("n_fmr_points", &CalibConfig::n_fmr_points)
      .def_property("omega_low", [](const CalibConfig& c) { return c.omega_grid.low; },
                    [](CalibConfig& c, double v) { c.omega_grid.low = v; })
      .def_property("omega_high", [](const CalibConfig& c) { return c.omega_grid.high; },
                    [](CalibConfig& c, double v) { c.omega_grid.high = v; })
      .def_property("omega_steps", [](const CalibConfig& c) { return c.omega_grid.steps; },
                    [](CalibConfig& c, std::size_t v) { c.omega_grid.steps = v; })
      .def_readwrite("use_sigmoid", &CalibConfig::use_sigmoid)
      .def_readwrite("threads", &CalibConfig::threads);

  py::class_<CalibrationPoint>(m, "CalibrationPoint")
      .def_readonly("fmr_target", &CalibrationPoint::fmr_target)
      .def_readonly("threshold", &CalibrationPoint::threshold)
      .def_readonly("omega_opt", &CalibrationPoint::omega_opt)
      .def_readonly("fnmr", &CalibrationPoint::fnmr);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("params", &CalibrationResult::params)
      .def_readonly("points", &CalibrationResult::points)
      .def_readonly("fit_r2", &CalibrationResult::fit_r2)
      .def_readonly("mean_t", &CalibrationResult::mean_t)
      .def_readonly("mean_omega", &CalibrationResult::mean_omega)
      .def_readonly("use_sigmoid", &CalibrationResult::use_sigmoid)
      .def_readonly("warnings", &CalibrationResult::warnings)
      .def("__eq__", [](const CalibrationResult& a, const CalibrationResult& b) { return a == b; });

  m.def("calibrate", &calibrate, py::arg("set"), py::arg("config") = CalibConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("fit_linear", [](const std::vector<std::pair<double, double>>& pts) {
    std::vector<LinePoint> lp;
    for (const auto& [t, w] : pts) lp.push_back({t, w});
    return fit_linear(lp);
  }, py::arg("points"), "Least-squares omega = beta * t - alpha over (t, omega) pairs");

  m.def("aggregate", [](const std::vector<std::vector<double>>& frames) {
    Template t;
    for (const auto& f : frames) t.frames.push_back(decompose(f));
    const auto a = aggregate(t);
    return py::make_tuple(a.direction, a.quality);
  }, py::arg("frames"), "(direction, quality) of raw frame embeddings fused into one");

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_static("planted", &SynthConfig::planted, py::arg("seed") = 1)
      .def_static("no_signal", &SynthConfig::no_signal, py::arg("seed") = 1)
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("n_subjects", &SynthConfig::n_subjects)
      .def_readwrite("samples_per_subject", &SynthConfig::samples_per_subject)
      .def_readwrite("d", &SynthConfig::d)
      .def_readwrite("q_low", &SynthConfig::q_low)
      .def_readwrite("q_high", &SynthConfig::q_high)
      .def_readwrite("genuine_quality_slope", &SynthConfig::genuine_quality_slope)
      .def_readwrite("noise_sd", &SynthConfig::noise_sd)
      .def_readwrite("base_angle", &SynthConfig::base_angle);
  m.def("generate", &generate, py::arg("config"));

  m.def("load_embeddings", &load_embeddings, py::arg("path"));
  m.def("save_embeddings", [](const std::filesystem::path& p, const std::vector<Embedding>& e) {
    save_embeddings(p, e);
  }, py::arg("path"), py::arg("embeddings"), "Binary for a .qmef extension, text otherwise");
  m.def("load_protocol", [](const std::filesystem::path& p) {
    std::vector<std::tuple<std::string, std::string, bool>> out;
    for (const auto& r : load_protocol(p)) out.emplace_back(r.a, r.b, r.label == Label::genuine);
    return out;
  }, py::arg("path"), "[(a, b, is_genuine)]");
  m.def("all_pairs", [](const std::vector<Embedding>& e) {
    std::vector<std::tuple<std::string, std::string, bool>> out;
    for (const auto& r : all_pairs(e)) out.emplace_back(r.a, r.b, r.label == Label::genuine);
    return out;
  }, py::arg("embeddings"));
  m.def("build_comparison_set", [](const std::vector<Embedding>& e,
                                   const std::vector<std::tuple<std::string, std::string, bool>>& rows) {
    PairProtocol p;
    for (const auto& [a, b, g] : rows) p.push_back({a, b, g ? Label::genuine : Label::imposter});
    return build_comparison_set(e, p);
  }, py::arg("embeddings"), py::arg("protocol"));
  m.def("load_calibration", &load_calibration, py::arg("path"));
  m.def("save_calibration", &save_calibration, py::arg("path"), py::arg("result"));
}
