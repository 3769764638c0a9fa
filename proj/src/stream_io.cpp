#include "owadd/stream_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace owadd {

namespace {

constexpr char kMagic[4] = {'O', 'W', 'S', 'T'};
constexpr std::uint32_t kStreamVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw TruncatedStreamFile("stream file ends inside the header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw TruncatedStreamFile("stream file ends inside the header");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    std::filesystem::path p = path;
    p += ".truth.json";
    return p;
}

} // namespace

void write_stream(const Stream& stream, const StreamConfig& config,
                  const std::filesystem::path& path) {
    if (stream.chunks.size() != stream.truth.class_ids.size()) {
        throw std::invalid_argument("write_stream: chunk/label count mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StreamIoError("cannot open " + path.string() + " for writing");

    out.write(kMagic, 4);
    write_u32(out, kStreamVersion);
    write_u32(out, static_cast<std::uint32_t>(config.n_chunks));
    write_u32(out, static_cast<std::uint32_t>(config.chunk_size));
    write_u32(out, static_cast<std::uint32_t>(config.n_features));
    write_u32(out, static_cast<std::uint32_t>(config.n_known_classes));
    write_u32(out, static_cast<std::uint32_t>(config.n_drifts));
    write_u32(out, static_cast<std::uint32_t>(config.n_novelties));
    write_f64(out, config.novel_proportion);
    write_f64(out, config.class_separation);
    write_u64(out, config.seed);
    write_u32(out, static_cast<std::uint32_t>(stream.chunks.size()));

    for (const Eigen::MatrixXd& chunk : stream.chunks) {
        write_u32(out, static_cast<std::uint32_t>(chunk.rows()));
        write_u32(out, static_cast<std::uint32_t>(chunk.cols()));
        for (Eigen::Index r = 0; r < chunk.rows(); ++r) {
            for (Eigen::Index c = 0; c < chunk.cols(); ++c) {
                write_f64(out, chunk(r, c));
            }
        }
    }
    if (!out) throw StreamIoError("write to " + path.string() + " failed");
    out.close();

    nlohmann::json truth;
    truth["format"] = "owadd.stream-truth";
    truth["version"] = 1;
    truth["n_known_classes"] = stream.truth.n_known_classes;
    nlohmann::json events = nlohmann::json::array();
    for (const StreamEvent& e : stream.truth.events) {
        events.push_back({{"chunk", e.chunk_index},
                          {"type", e.type == EventType::drift ? "drift" : "novelty"},
                          {"class_id", e.class_id}});
    }
    truth["events"] = std::move(events);
    truth["class_ids"] = stream.truth.class_ids;

    std::ofstream sidecar(sidecar_path(path));
    if (!sidecar) throw StreamIoError("cannot open " + sidecar_path(path).string() + " for writing");
    sidecar << truth.dump() << '\n';
}

LoadedStream read_stream(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StreamIoError("cannot open " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw MalformedStreamFile(path.string() + " is not an OWST stream file");
    }
    const std::uint32_t version = read_u32(in);
    if (version != kStreamVersion) {
        throw StreamVersionMismatch("stream file version " + std::to_string(version) +
                                    " is not supported (expected " +
                                    std::to_string(kStreamVersion) + ")");
    }

    LoadedStream loaded;
    StreamConfig& config = loaded.config;
    config.n_chunks = static_cast<int>(read_u32(in));
    config.chunk_size = static_cast<int>(read_u32(in));
    config.n_features = static_cast<int>(read_u32(in));
    config.n_known_classes = static_cast<int>(read_u32(in));
    config.n_drifts = static_cast<int>(read_u32(in));
    config.n_novelties = static_cast<int>(read_u32(in));
    config.novel_proportion = read_f64(in);
    config.class_separation = read_f64(in);
    config.seed = read_u64(in);
    const std::uint32_t n_chunks = read_u32(in);

    loaded.stream.chunks.reserve(n_chunks);
    for (std::uint32_t i = 0; i < n_chunks; ++i) {
        const std::uint32_t rows = read_u32(in);
        const std::uint32_t cols = read_u32(in);
        if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 20)) {
            throw MalformedStreamFile("stream file declares an implausible chunk shape");
        }
        Eigen::MatrixXd chunk(rows, cols);
        std::vector<char> raw(static_cast<std::size_t>(rows) * cols * sizeof(double));
        in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        if (!in) throw TruncatedStreamFile("stream file ends inside chunk " + std::to_string(i));
        const char* p = raw.data();
        for (std::uint32_t r = 0; r < rows; ++r) {
            for (std::uint32_t c = 0; c < cols; ++c) {
                std::uint64_t bits = 0;
                for (int b = 0; b < 8; ++b) {
                    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
                }
                chunk(r, c) = std::bit_cast<double>(bits);
                p += 8;
            }
        }
        loaded.stream.chunks.push_back(std::move(chunk));
    }

    loaded.stream.truth = read_ground_truth(path);
    if (loaded.stream.truth.class_ids.size() != loaded.stream.chunks.size()) {
        throw MalformedStreamFile("ground-truth sidecar does not match the stream's chunk count");
    }
    for (std::size_t i = 0; i < loaded.stream.chunks.size(); ++i) {
        if (static_cast<Eigen::Index>(loaded.stream.truth.class_ids[i].size()) !=
            loaded.stream.chunks[i].rows()) {
            throw MalformedStreamFile("ground-truth labels do not match chunk " +
                                      std::to_string(i) + " row count");
        }
    }
    return loaded;
}

GroundTruth read_ground_truth(const std::filesystem::path& stream_path) {
    std::ifstream sidecar(sidecar_path(stream_path));
    if (!sidecar) {
        throw MalformedStreamFile("missing ground-truth sidecar " +
                                  sidecar_path(stream_path).string());
    }
    nlohmann::json truth;
    try {
        sidecar >> truth;
    } catch (const nlohmann::json::exception&) {
        throw MalformedStreamFile("ground-truth sidecar is not valid JSON");
    }
    if (truth.value("format", "") != "owadd.stream-truth") {
        throw MalformedStreamFile("ground-truth sidecar has an unrecognized format tag");
    }
    if (truth.value("version", 0) != 1) {
        throw StreamVersionMismatch("ground-truth sidecar version is not supported");
    }
    GroundTruth out;
    out.n_known_classes = truth.at("n_known_classes").get<int>();
    for (const auto& ej : truth.at("events")) {
        StreamEvent e;
        e.chunk_index = ej.at("chunk").get<int>();
        e.type = ej.at("type").get<std::string>() == "drift" ? EventType::drift
                                                             : EventType::novelty;
        e.class_id = ej.at("class_id").get<int>();
        out.events.push_back(e);
    }
    out.class_ids = truth.at("class_ids").get<std::vector<std::vector<int>>>();
    return out;
}

void export_stream_csv(const Stream& stream, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw StreamIoError("cannot open " + path.string() + " for writing");
    const Eigen::Index n_features = stream.chunks.empty() ? 0 : stream.chunks.front().cols();
    out << "chunk,class_id,is_unknown";
    for (Eigen::Index f = 0; f < n_features; ++f) out << ",f" << f;
    out << '\n';
    char buf[32];
    for (std::size_t n = 0; n < stream.chunks.size(); ++n) {
        const Eigen::MatrixXd& chunk = stream.chunks[n];
        for (Eigen::Index r = 0; r < chunk.rows(); ++r) {
            const int class_id = stream.truth.class_ids[n][static_cast<std::size_t>(r)];
            out << n << ',' << class_id << ',' << (stream.truth.is_unknown(class_id) ? 1 : 0);
            for (Eigen::Index c = 0; c < chunk.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", chunk(r, c));
                out << ',' << buf;
            }
            out << '\n';
        }
    }
}

} // namespace owadd
