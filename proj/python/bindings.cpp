#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "convxai/artifacts.hpp"
#include "convxai/dtw.hpp"
#include "convxai/error.hpp"
#include "convxai/nlu.hpp"
#include "convxai/service.hpp"
#include "convxai/synthetic.hpp"
#include "convxai/text.hpp"

namespace py = pybind11;
using namespace convxai;

namespace {

py::object to_python(const nlohmann::json& j) {
  // Not cached in a static: it would be released after the interpreter.
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<AspectLabel> labels_from(const std::vector<std::string>& names) {
  std::vector<AspectLabel> out;
  for (const auto& n : names) {
    const auto label = parse_aspect(n);
    if (!label) throw InvalidInput("unknown aspect label '" + n + "'");
    out.push_back(*label);
  }
  return out;
}

Intent intent_from(const std::string& name) {
  const auto intent = parse_intent(name);
  if (!intent) throw InvalidInput("unknown intent '" + name + "'");
  return *intent;
}

}  // namespace

PYBIND11_MODULE(_convxai, m) {
  m.doc() = "Conversational writing-support explanations";

  auto error = py::register_exception<Error>(m, "ConvXaiError");
  py::register_exception<InvalidInput>(m, "InvalidInputError", error.ptr());
  py::register_exception<DegenerateInput>(m, "DegenerateInputError", error.ptr());
  py::register_exception<NotFound>(m, "NotFoundError", error.ptr());
  py::register_exception<Unauthorized>(m, "UnauthorizedError", error.ptr());
  py::register_exception<ArtifactError>(m, "ArtifactError", error.ptr());

  m.def("split_sentences", &split_sentences, py::arg("text"));
  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "dtw_distance",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        return dtw_distance(labels_from(a), labels_from(b));
      },
      py::arg("a"), py::arg("b"), "0/1-cost DTW distance between two aspect label sequences.");
  m.def(
      "classify_intent",
      [](const std::string& utterance, std::optional<std::string> last_intent) {
        static const IntentClassifier classifier;
        std::optional<Intent> last;
        if (last_intent) last = intent_from(*last_intent);
        const auto match = classifier.classify(utterance, last);
        py::dict out;
        out["intent"] = std::string(to_string(match.intent));
        out["confidence"] = match.confidence;
        out["stage"] = std::string(to_string(match.stage));
        return out;
      },
      py::arg("utterance"), py::arg("last_intent") = py::none());
  m.def(
      "parse_variables",
      [](const std::string& utterance, const std::string& intent) {
        const auto parsed = parse_variables(utterance, intent_from(intent));
        py::dict out;
        out["variables"] = to_python(to_json(parsed.variables));
        out["notices"] = parsed.notices;
        out["variables_only"] = parsed.variables_only;
        return out;
      },
      py::arg("utterance"), py::arg("intent"));

  py::class_<ArtifactBundle, std::shared_ptr<ArtifactBundle>>(m, "Bundle")
      .def_static(
          "train_synthetic",
          [](std::size_t abstracts_per_conference, std::uint64_t seed) {
            SyntheticOptions options;
            options.abstracts_per_conference = abstracts_per_conference;
            options.seed = seed;
            py::gil_scoped_release release;
            return std::make_shared<ArtifactBundle>(train_artifacts(synthetic_corpus(options)));
          },
          py::arg("abstracts_per_conference") = 60, py::arg("seed") = 7)
      .def_static(
          "train",
          [](const std::filesystem::path& corpus_path, bool strict) {
            py::gil_scoped_release release;
            auto ingest = ingest_corpus(corpus_path, strict);
            return std::make_shared<ArtifactBundle>(train_artifacts(ingest.corpus));
          },
          py::arg("corpus_path"), py::arg("strict") = false)
      .def_static(
          "load",
          [](const std::filesystem::path& dir) { return std::make_shared<ArtifactBundle>(ArtifactBundle::load(dir)); },
          py::arg("directory"))
      .def("save", &ArtifactBundle::save, py::arg("directory"))
      .def_property_readonly("conferences", &ArtifactBundle::conference_names)
      .def(
          "analyze",
          [](const ArtifactBundle& bundle, const std::string& conference, const std::string& text) {
            const auto& conf = bundle.conference(conference);
            return to_python(to_json(analyze_abstract(text, 1, bundle.classifier, conf.style_model, conf.profile,
                                                      {}, bundle.templates)));
          },
          py::arg("conference"), py::arg("text"))
      .def(
          "predict",
          [](const ArtifactBundle& bundle, const std::string& sentence) {
            return to_python(to_json(bundle.classifier.predict(sentence)));
          },
          py::arg("sentence"));

  // The bundle is held by shared_ptr inside the wrapper so the service can
  // keep a reference to it.
  struct PyService {
    std::shared_ptr<ArtifactBundle> bundle;
    std::unique_ptr<ConvXaiService> service;
  };
  py::class_<PyService>(m, "Service")
      .def(py::init([](std::shared_ptr<ArtifactBundle> bundle, const std::filesystem::path& log_dir,
                       std::size_t snapshot_every) {
             ServiceConfig config;
             config.log_dir = log_dir;
             config.snapshot_every = snapshot_every;
             auto s = std::make_unique<PyService>();
             s->bundle = std::move(bundle);
             s->service = std::make_unique<ConvXaiService>(*s->bundle, config);
             return s;
           }),
           py::arg("bundle"), py::arg("log_dir"), py::arg("snapshot_every") = 0)
      .def("create_session", [](PyService& s, const std::string& c) { return s.service->create_session(c); },
           py::arg("conference"))
      .def(
          "submit",
          [](PyService& s, const std::string& id, const std::string& text) {
            const auto r = s.service->submit_abstract(id, text);
            py::dict out;
            out["document"] = to_python(to_json(r.document));
            out["summary"] = to_python(to_json(r.summary));
            return out;
          },
          py::arg("session_id"), py::arg("text"))
      .def(
          "select",
          [](PyService& s, const std::string& id, std::size_t index) {
            return to_python(to_json(s.service->select_sentence(id, index)));
          },
          py::arg("session_id"), py::arg("index"))
      .def(
          "chat",
          [](PyService& s, const std::string& id, const std::string& utterance) {
            return to_python(to_json(s.service->post_chat(id, utterance)));
          },
          py::arg("session_id"), py::arg("utterance"))
      .def(
          "log",
          [](PyService& s, const std::string& id) { return to_python(nlohmann::json(s.service->session_log(id))); },
          py::arg("session_id"))
      .def(
          "usage_stats",
          [](PyService& s, std::optional<std::string> id) {
            return to_python(id ? s.service->usage_stats(std::string_view(*id)).to_json()
                                : s.service->usage_stats().to_json());
          },
          py::arg("session_id") = py::none())
      .def("recover", [](PyService& s) { return s.service->recover(); });

  m.def(
      "replay",
      [](const std::shared_ptr<ArtifactBundle>& bundle, const std::filesystem::path& log_path) {
        const auto events = read_event_log(log_path);
        const auto r = replay_events(*bundle, events);
        py::dict out;
        out["all_match"] = r.all_match();
        out["matches"] = r.matches;
        out["stats"] = to_python(r.stats.to_json());
        out["transcript"] = format_transcript(events, r);
        return out;
      },
      py::arg("bundle"), py::arg("log_path"));
}
