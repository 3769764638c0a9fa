#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "owadd/autoencoder.hpp"
#include "owadd/baselines.hpp"
#include "owadd/detector.hpp"
#include "owadd/evaluation.hpp"
#include "owadd/harness.hpp"
#include "owadd/stats.hpp"
#include "owadd/stream_io.hpp"
#include "owadd/streamgen.hpp"

namespace py = pybind11;
using namespace owadd;

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Autoencoder drift detection and novelty recognition for tabular streams";

    // ---- statistics ----
    py::class_<TTestResult>(m, "TTestResult")
        .def_readonly("t_statistic", &TTestResult::t_statistic)
        .def_readonly("degrees_of_freedom", &TTestResult::degrees_of_freedom)
        .def_readonly("p_value", &TTestResult::p_value)
        .def("__repr__", [](const TTestResult& r) {
            return "TTestResult(t=" + std::to_string(r.t_statistic) +
                   ", dof=" + std::to_string(r.degrees_of_freedom) +
                   ", p=" + std::to_string(r.p_value) + ")";
        });

    m.def(
        "one_sided_t_test",
        [](const std::vector<double>& reference, const std::vector<double>& current) {
            return one_sided_t_test(reference, current);
        },
        py::arg("reference"), py::arg("current"),
        "Welch test of H0: mean(reference) >= mean(current); p is small when "
        "the current mean exceeds the reference mean.");
    m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("dof"));
    m.def(
        "subsample",
        [](const std::vector<double>& values, std::size_t n, std::uint64_t seed) {
            Rng rng(seed);
            return subsample(values, n, rng);
        },
        py::arg("values"), py::arg("n"), py::arg("seed") = 0,
        "n values drawn uniformly without replacement.");

    py::class_<KdeModel>(m, "KdeModel")
        .def_readonly("support_points", &KdeModel::support_points)
        .def_readonly("bandwidth", &KdeModel::bandwidth)
        .def_readonly("degenerate", &KdeModel::degenerate)
        .def("score", [](const KdeModel& model, const std::vector<double>& points) {
            return kde_score(model, points);
        });
    m.def("kde_fit",
          [](const std::vector<double>& errors) { return kde_fit(errors); },
          py::arg("errors"), "Gaussian KDE with Scott's-rule bandwidth.");
    m.def("kde_score",
          [](const KdeModel& model, const std::vector<double>& points) {
              return kde_score(model, points);
          },
          py::arg("model"), py::arg("points"));
    m.def(
        "ks_two_sample",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const KsResult r = ks_two_sample(a, b);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("a"), py::arg("b"), "Returns (statistic, p_value).");

    // ---- autoencoder ----
    py::enum_<TrainLoss>(m, "TrainLoss")
        .value("mae", TrainLoss::mean_absolute_error)
        .value("mse", TrainLoss::mean_squared_error);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("loss", &TrainConfig::loss);

    py::class_<Autoencoder>(m, "Autoencoder")
        .def(py::init<int, const std::vector<int>&, std::uint64_t>(), py::arg("input_dim"),
             py::arg("hidden_widths"), py::arg("seed") = 0)
        .def_property_readonly("input_dim", &Autoencoder::input_dim)
        .def("reconstruct",
             [](const Autoencoder& a, const Eigen::VectorXd& x) { return a.reconstruct(x); })
        .def("reconstruct_batch", &Autoencoder::reconstruct_batch)
        .def("reconstruction_errors",
             [](const Autoencoder& a, const Eigen::MatrixXd& rows) {
                 return to_vec(a.reconstruction_errors(rows));
             })
        .def("train", &Autoencoder::train, py::arg("rows"),
             py::arg("config") = TrainConfig{}, "Returns the mean loss of the final epoch.")
        .def("clone", [](const Autoencoder& a) { return Autoencoder(a); })
        .def("save", &Autoencoder::save, py::arg("path"))
        .def_static("load", &Autoencoder::load, py::arg("path"))
        .def("layer_widths", [](const Autoencoder& a) {
            std::vector<int> widths{a.input_dim()};
            for (const auto& layer : a.layers()) {
                widths.push_back(static_cast<int>(layer.weight.rows()));
            }
            return widths;
        });

    // ---- detector ----
    py::class_<DetectorConfig>(m, "DetectorConfig")
        .def(py::init<>())
        .def_readwrite("replications", &DetectorConfig::replications)
        .def_readwrite("sample_size", &DetectorConfig::sample_size)
        .def_readwrite("drift_threshold", &DetectorConfig::drift_threshold)
        .def_readwrite("novelty_threshold", &DetectorConfig::novelty_threshold)
        .def_readwrite("buffer_capacity", &DetectorConfig::buffer_capacity)
        .def_readwrite("epochs", &DetectorConfig::epochs)
        .def_readwrite("significance", &DetectorConfig::significance)
        .def_readwrite("hidden_widths", &DetectorConfig::hidden_widths)
        .def_readwrite("learning_rate", &DetectorConfig::learning_rate)
        .def_readwrite("batch_size", &DetectorConfig::batch_size)
        .def_readwrite("loss", &DetectorConfig::loss)
        .def_readwrite("seed", &DetectorConfig::seed);

    py::class_<ChunkVerdict>(m, "ChunkVerdict")
        .def_readonly("chunk_index", &ChunkVerdict::chunk_index)
        .def_readonly("drift", &ChunkVerdict::drift)
        .def_readonly("labels_known", &ChunkVerdict::labels_known)
        .def_readonly("positive_test_count", &ChunkVerdict::positive_test_count)
        .def_readonly("mean_reference_error", &ChunkVerdict::mean_reference_error)
        .def_readonly("mean_current_error", &ChunkVerdict::mean_current_error)
        .def_property_readonly("unknown_count", &ChunkVerdict::unknown_count);

    py::class_<Detector>(m, "Detector")
        .def(py::init<const Eigen::MatrixXd&, const DetectorConfig&>(), py::arg("first_chunk"),
             py::arg("config") = DetectorConfig{})
        .def("initial_verdict", &Detector::initial_verdict)
        .def("process_chunk", &Detector::process_chunk, py::arg("chunk"))
        .def("recognize_unknown", &Detector::recognize_unknown, py::arg("chunk"))
        .def("confirm_novelty", &Detector::confirm_novelty, py::arg("chunk"))
        .def("known_class_errors",
             [](const Detector& d, const Eigen::MatrixXd& chunk) {
                 return to_vec(d.known_class_errors(chunk));
             })
        .def_property_readonly("chunk_counter", &Detector::chunk_counter)
        .def_property_readonly("buffer_size", [](const Detector& d) { return d.buffer().size(); })
        .def_property_readonly("kde",
                               [](const Detector& d) -> std::optional<KdeModel> { return d.kde(); })
        .def("save", &Detector::save, py::arg("path"))
        .def_static("load", &Detector::load, py::arg("path"));

    // ---- stream generation ----
    py::class_<StreamConfig>(m, "StreamConfig")
        .def(py::init<>())
        .def_readwrite("n_chunks", &StreamConfig::n_chunks)
        .def_readwrite("chunk_size", &StreamConfig::chunk_size)
        .def_readwrite("n_features", &StreamConfig::n_features)
        .def_readwrite("n_known_classes", &StreamConfig::n_known_classes)
        .def_readwrite("n_drifts", &StreamConfig::n_drifts)
        .def_readwrite("n_novelties", &StreamConfig::n_novelties)
        .def_readwrite("novel_proportion", &StreamConfig::novel_proportion)
        .def_readwrite("class_separation", &StreamConfig::class_separation)
        .def_readwrite("seed", &StreamConfig::seed);

    py::enum_<EventType>(m, "EventType")
        .value("drift", EventType::drift)
        .value("novelty", EventType::novelty);

    py::class_<StreamEvent>(m, "StreamEvent")
        .def_readonly("chunk_index", &StreamEvent::chunk_index)
        .def_readonly("type", &StreamEvent::type)
        .def_readonly("class_id", &StreamEvent::class_id);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("events", &GroundTruth::events)
        .def_readonly("class_ids", &GroundTruth::class_ids)
        .def_readonly("n_known_classes", &GroundTruth::n_known_classes)
        .def("event_chunks", &GroundTruth::event_chunks)
        .def("known_labels", &GroundTruth::known_labels);

    py::class_<Stream>(m, "Stream")
        .def_readonly("chunks", &Stream::chunks)
        .def_readonly("truth", &Stream::truth);

    m.def("event_schedule", &event_schedule, py::arg("config"));
    m.def("generate_stream", &generate_stream, py::arg("config"));
    m.def(
        "write_stream",
        [](const Stream& stream, const StreamConfig& config, const std::filesystem::path& path) {
            write_stream(stream, config, path);
        },
        py::arg("stream"), py::arg("config"), py::arg("path"));
    m.def(
        "read_stream",
        [](const std::filesystem::path& path) {
            LoadedStream loaded = read_stream(path);
            return py::make_tuple(std::move(loaded.stream), loaded.config);
        },
        py::arg("path"), "Returns (stream, config).");
    m.def("export_stream_csv", &export_stream_csv, py::arg("stream"), py::arg("path"));

    // ---- evaluation ----
    py::class_<DetectionLog>(m, "DetectionLog")
        .def(py::init([](std::vector<int> detections, int n_chunks) {
                 return DetectionLog{std::move(detections), n_chunks};
             }),
             py::arg("detections"), py::arg("n_chunks"))
        .def_readwrite("detections", &DetectionLog::detections)
        .def_readwrite("n_chunks", &DetectionLog::n_chunks);

    m.def(
        "d1",
        [](const DetectionLog& log, const std::vector<int>& events) { return d1(log, events); },
        py::arg("log"), py::arg("events"));
    m.def(
        "d2",
        [](const DetectionLog& log, const std::vector<int>& events) { return d2(log, events); },
        py::arg("log"), py::arg("events"));
    m.def(
        "r_measure",
        [](const DetectionLog& log, const std::vector<int>& events, bool raw) {
            return r_measure(log, events,
                             raw ? RMeasureVariant::raw_difference : RMeasureVariant::normalized);
        },
        py::arg("log"), py::arg("events"), py::arg("raw_difference") = false);

    py::class_<ClassificationReport>(m, "ClassificationReport")
        .def_readonly("recall", &ClassificationReport::recall)
        .def_readonly("specificity", &ClassificationReport::specificity)
        .def_readonly("balanced_accuracy", &ClassificationReport::balanced_accuracy)
        .def_property_readonly("confusion", [](const ClassificationReport& r) {
            py::dict d;
            d["tp"] = r.counts.tp;
            d["fn"] = r.counts.fn;
            d["tn"] = r.counts.tn;
            d["fp"] = r.counts.fp;
            return d;
        });
    m.def("classification_metrics", &classification_metrics, py::arg("predicted_known"),
          py::arg("truth_known"));

    // ---- baselines ----
    py::class_<KsddDetector>(m, "KsddDetector")
        .def(py::init<const Eigen::MatrixXd&, int, double>(), py::arg("first_chunk"),
             py::arg("window_size") = 200, py::arg("threshold") = 0.005)
        .def("process_chunk", &KsddDetector::process_chunk, py::arg("chunk"));

    py::class_<CentroidNovelty>(m, "CentroidNovelty")
        .def(py::init<const Eigen::MatrixXd&, int, std::uint64_t>(), py::arg("first_chunk"),
             py::arg("n_clusters"), py::arg("seed") = 0)
        .def("labels", &CentroidNovelty::labels, py::arg("chunk"));

    m.attr("__version__") = "0.1.0";
}
