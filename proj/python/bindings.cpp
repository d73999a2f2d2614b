#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vsid/acrlag.hpp"
#include "vsid/error.hpp"
#include "vsid/gmm.hpp"
#include "vsid/lp.hpp"
#include "vsid/pipeline.hpp"
#include "vsid/spectral.hpp"
#include "vsid/synth.hpp"

namespace py = pybind11;
using namespace vsid;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> ToVector(const Array& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::kDimError, "expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array ToArray(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array ToArray(const FeatureMatrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.dim())});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

FeatureMatrix ToMatrix(const Array& a, FeatureKind kind) {
  if (a.ndim() != 2) throw Error(ErrorCode::kDimError, "expected a 2-D array");
  return FeatureMatrix(kind, static_cast<std::size_t>(a.shape(1)),
                       std::vector<double>(a.data(), a.data() + a.size()));
}

AudioSignal ToSignal(const Array& samples, int rate) { return {ToVector(samples), rate}; }

py::object FromJson(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json ToJson(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

PipelineConfig Config(const py::object& overrides) {
  return overrides.is_none() ? PipelineConfig{} : ConfigFromJson(ToJson(overrides));
}

}  // namespace

PYBIND11_MODULE(_vsid, m) {
  m.doc() = "Speaker identification with LP-residual autocorrelation features and GMMs.";

  static py::exception<Error> error(m, "VsidError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def("read_wav", [](const std::string& path) {
    const auto s = ReadWav(path);
    return py::make_tuple(ToArray(s.samples), s.sample_rate_hz);
  }, py::arg("path"), "Returns (samples, sample_rate_hz).");
  m.def("write_wav", [](const std::string& path, const Array& samples, int rate) {
    WriteWav(path, ToSignal(samples, rate));
  }, py::arg("path"), py::arg("samples"), py::arg("sample_rate_hz") = 8000);

  m.def("prepare_frames", [](const Array& samples, int rate) {
    const auto seq = PrepareFrames(ToSignal(samples, rate), FrameConfig{});
    const std::size_t n = seq.size(), len = seq.empty() ? 0 : seq.frames[0].size();
    Array out({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(len)});
    for (std::size_t i = 0; i < n; ++i)
      std::copy(seq.frames[i].begin(), seq.frames[i].end(), out.mutable_data() + i * len);
    return out;
  }, py::arg("samples"), py::arg("sample_rate_hz") = 8000,
     "Silence removal, pre-emphasis, framing and Hamming window.");

  m.def("autocorr", [](const Array& x, int max_lag) { return ToArray(Autocorr(ToVector(x), max_lag)); },
        py::arg("x"), py::arg("max_lag"));
  m.def("levinson_durbin", [](const Array& r) {
    const auto res = LevinsonDurbin(ToVector(r));
    return py::make_tuple(ToArray(res.coeffs), ToArray(res.reflection), res.error_power);
  }, py::arg("r"), "Returns (coeffs, reflection, error_power).");
  m.def("lp_residual", [](const Array& frame, const Array& coeffs) {
    return ToArray(Residual(ToVector(frame), ToVector(coeffs)));
  }, py::arg("frame"), py::arg("coeffs"));
  m.def("lp_synthesize", [](const Array& excitation, const Array& coeffs) {
    return ToArray(Synthesize(ToVector(excitation), ToVector(coeffs)));
  }, py::arg("excitation"), py::arg("coeffs"));
  m.def("lpcc", [](const Array& coeffs, int n) { return ToArray(Lpcc(ToVector(coeffs), n)); },
        py::arg("coeffs"), py::arg("n_cep"));
  m.def("lsf", [](const Array& coeffs) { return ToArray(Lsf(ToVector(coeffs))); }, py::arg("coeffs"));

  m.def("normalize_residual", [](const Array& e) { return ToArray(NormalizeResidual(ToVector(e))); },
        py::arg("e"));
  m.def("acrlag_feature", [](const Array& e, int lp_order, int lag) {
    return ToArray(AcrlagFeature(ToVector(e), AcrlagConfig{lp_order, lag}));
  }, py::arg("residual"), py::arg("lp_order") = 13, py::arg("lag") = 12);

  m.def("extract", [](const Array& samples, int rate, const py::object& config) {
    const auto f = ExtractStreams(ToSignal(samples, rate), Config(config));
    return py::make_tuple(ToArray(f.spectral), ToArray(f.residual));
  }, py::arg("samples"), py::arg("sample_rate_hz") = 8000, py::arg("config") = py::none(),
     "Returns (spectral, acrlag) feature matrices.");

  py::class_<GmmModel>(m, "GmmModel")
      .def_property_readonly("n_components", &GmmModel::n_components)
      .def_readonly("dim", &GmmModel::dim)
      .def_property_readonly("kind", [](const GmmModel& g) { return std::string(FeatureKindName(g.kind)); })
      .def_property_readonly("weights", [](const GmmModel& g) { return ToArray(g.weights); })
      .def_property_readonly("means", [](const GmmModel& g) {
        return ToArray(FeatureMatrix(g.kind, g.dim, g.means));
      })
      .def_property_readonly("variances", [](const GmmModel& g) {
        return ToArray(FeatureMatrix(g.kind, g.dim, g.variances));
      })
      .def("log_density", [](const GmmModel& g, const Array& x) { return LogDensity(g, ToVector(x)); })
      .def("score", [](const GmmModel& g, const Array& x) {
        return UtteranceScore(g, ToMatrix(x, g.kind));
      }, "Sum of frame log-densities.")
      .def("save", [](const GmmModel& g, const std::string& path) { SaveGmm(path, g); })
      .def_static("load", &LoadGmm)
      .def("__eq__", [](const GmmModel& a, const GmmModel& b) { return a == b; });

  m.def("train_gmm", [](const Array& x, int n_components, int em_iterations, std::uint64_t seed,
                        const std::string& kind) {
    TrainConfig cfg;
    cfg.n_components = n_components;
    cfg.em_iterations = em_iterations;
    cfg.seed = seed;
    return TrainGmm(ToMatrix(x, ParseFeatureKind(kind)), cfg);
  }, py::arg("features"), py::arg("n_components") = 16, py::arg("em_iterations") = 10,
     py::arg("seed") = 0, py::arg("kind") = "MFCC");

  m.def("synth_corpus", [](const std::string& out_dir, int n_speakers, int train_utterances,
                           int test_utterances, double train_seconds, double test_seconds,
                           std::uint64_t seed) {
    SynthConfig sc;
    sc.n_speakers = n_speakers;
    sc.train_utterances = train_utterances;
    sc.test_utterances = test_utterances;
    sc.train_seconds = train_seconds;
    sc.test_seconds = test_seconds;
    sc.seed = seed;
    SynthCorpus(out_dir, sc);
    return out_dir + "/manifest.json";
  }, py::arg("out_dir"), py::arg("n_speakers") = 10, py::arg("train_utterances") = 10,
     py::arg("test_utterances") = 10, py::arg("train_seconds") = 4.0,
     py::arg("test_seconds") = 4.0, py::arg("seed") = 0, "Returns the manifest path.");

  py::class_<SpeakerDatabase>(m, "SpeakerDatabase")
      .def_property_readonly("speakers", [](const SpeakerDatabase& db) {
        std::vector<std::string> ids;
        for (const auto& kv : db.speakers) ids.push_back(kv.first);
        return ids;
      })
      .def_property_readonly("config", [](const SpeakerDatabase& db) { return FromJson(ConfigToJson(db.config)); })
      .def("models", [](const SpeakerDatabase& db, const std::string& id) {
        const auto& s = db.speakers.at(id);
        return py::make_tuple(s.spectral, s.residual);
      }, py::arg("speaker"), "Returns (spectral, residual) models.")
      .def("save", [](const SpeakerDatabase& db, const std::string& path) { SaveDatabase(path, db); })
      .def_static("load", &LoadDatabase)
      .def("to_bytes", [](const SpeakerDatabase& db) {
        const auto b = SerializeDatabase(db);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      })
      .def("score", [](const SpeakerDatabase& db, const Array& samples, int rate) {
        py::list out;
        for (const auto& s : ScoreUtterance(db, ToSignal(samples, rate)))
          out.append(py::make_tuple(s.id, s.spectral, s.residual));
        return out;
      }, py::arg("samples"), py::arg("sample_rate_hz") = 8000,
         "Per-speaker (id, spectral, residual) log-likelihoods.")
      .def("identify", [](const SpeakerDatabase& db, const Array& samples, int rate, double eta) {
        const auto d = Identify(db, ToSignal(samples, rate), FusionConfig{eta});
        py::dict out;
        out["spectral"] = d.spectral;
        out["residual"] = d.residual;
        out["fused"] = d.fused;
        return out;
      }, py::arg("samples"), py::arg("sample_rate_hz") = 8000, py::arg("eta") = 0.5)
      .def("evaluate", [](const SpeakerDatabase& db, const std::string& manifest, double eta) {
        return FromJson(ReportToJson(Evaluate(db, LoadManifest(manifest), FusionConfig{eta})));
      }, py::arg("manifest"), py::arg("eta") = 0.5);

  m.def("train_database", [](const std::string& manifest, const py::object& config) {
    return TrainDatabase(LoadManifest(manifest), Config(config));
  }, py::arg("manifest"), py::arg("config") = py::none(),
     "Config is a dict with the same layout as the CLI --config JSON.");

  m.def("fuse", [](double spectral, double residual, double eta) {
    return FuseScores(spectral, residual, FusionConfig{eta});
  }, py::arg("spectral"), py::arg("residual"), py::arg("eta") = 0.5);
}
