#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "owadd/stream_io.hpp"
#include "owadd/streamgen.hpp"

using namespace owadd;

namespace {

std::vector<int> indices(const std::vector<StreamEvent>& events) {
    std::vector<int> out;
    for (const auto& e : events) out.push_back(e.chunk_index);
    return out;
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Eigen::VectorXd class_mean(const Stream& stream, std::size_t chunk, int class_id) {
    const Eigen::MatrixXd& rows = stream.chunks[chunk];
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(rows.cols());
    int count = 0;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        if (stream.truth.class_ids[chunk][static_cast<std::size_t>(r)] == class_id) {
            sum += rows.row(r).transpose();
            ++count;
        }
    }
    REQUIRE(count > 0);
    return sum / count;
}

} // namespace

TEST_CASE("event schedule follows the even-spacing rule") {
    SUBCASE("1 drift and 5 novelties over 100 chunks") {
        StreamConfig config;
        config.n_chunks = 100;
        config.n_drifts = 1;
        config.n_novelties = 5;
        const auto events = event_schedule(config);
        CHECK(indices(events) == std::vector<int>{14, 28, 42, 57, 71, 85});
        CHECK(events[0].type == EventType::novelty);
        CHECK(events[1].type == EventType::drift);
        for (std::size_t i = 2; i < events.size(); ++i) {
            CHECK(events[i].type == EventType::novelty);
        }
        // novel class ids follow the known classes
        CHECK(events[0].class_id == config.n_known_classes);
        CHECK(events[2].class_id == config.n_known_classes + 1);
    }

    SUBCASE("2 drifts and 3 novelties over 200 chunks") {
        StreamConfig config;
        config.n_chunks = 200;
        config.n_drifts = 2;
        config.n_novelties = 3;
        const auto events = event_schedule(config);
        CHECK(indices(events) == std::vector<int>{33, 66, 100, 133, 166});
        CHECK(events[0].type == EventType::novelty);
        CHECK(events[1].type == EventType::drift);
        CHECK(events[2].type == EventType::novelty);
        CHECK(events[3].type == EventType::drift);
        CHECK(events[4].type == EventType::novelty);
    }

    SUBCASE("a stationary stream has no events") {
        StreamConfig config;
        config.n_drifts = 0;
        config.n_novelties = 0;
        CHECK(event_schedule(config).empty());
    }

    SUBCASE("indices stay unique, ordered and inside (0, n_chunks)") {
        for (int n_chunks : {10, 37, 200}) {
            for (int drifts : {0, 1, 4}) {
                for (int novelties : {0, 2, 5}) {
                    if (drifts + novelties >= n_chunks || drifts + novelties == 0) continue;
                    StreamConfig config;
                    config.n_chunks = n_chunks;
                    config.n_drifts = drifts;
                    config.n_novelties = novelties;
                    const auto events = event_schedule(config);
                    REQUIRE(static_cast<int>(events.size()) == drifts + novelties);
                    std::set<int> seen;
                    int prev = 0;
                    for (const auto& e : events) {
                        CHECK(e.chunk_index >= 1);
                        CHECK(e.chunk_index <= n_chunks - 1);
                        CHECK(e.chunk_index > prev);
                        prev = e.chunk_index;
                        seen.insert(e.chunk_index);
                    }
                    CHECK(seen.size() == events.size());
                }
            }
        }
    }

    SUBCASE("too many events are rejected") {
        StreamConfig config;
        config.n_chunks = 5;
        config.n_drifts = 3;
        config.n_novelties = 2;
        CHECK_THROWS_AS(event_schedule(config), std::invalid_argument);
    }
}

TEST_CASE("generated streams match their configuration") {
    StreamConfig config;
    config.n_chunks = 12;
    config.chunk_size = 60;
    config.n_features = 5;
    config.n_drifts = 1;
    config.n_novelties = 1;
    config.novel_proportion = 0.2;
    config.class_separation = 3.0;
    config.seed = 9;

    const Stream stream = generate_stream(config);
    REQUIRE(stream.chunks.size() == 12);
    for (std::size_t n = 0; n < stream.chunks.size(); ++n) {
        CHECK(stream.chunks[n].rows() == 60);
        CHECK(stream.chunks[n].cols() == 5);
        CHECK(stream.chunks[n].allFinite());
        CHECK(stream.truth.class_ids[n].size() == 60);
    }
    REQUIRE(stream.truth.events.size() == 2);

    SUBCASE("stationary config gives empty truth and stable distribution") {
        StreamConfig flat = config;
        flat.n_drifts = 0;
        flat.n_novelties = 0;
        const Stream s = generate_stream(flat);
        CHECK(s.truth.events.empty());
        for (const auto& chunk_labels : s.truth.class_ids) {
            for (int id : chunk_labels) CHECK(id < flat.n_known_classes);
        }
    }

    SUBCASE("determinism: same config and seed give identical streams") {
        const Stream again = generate_stream(config);
        for (std::size_t n = 0; n < stream.chunks.size(); ++n) {
            CHECK(stream.chunks[n] == again.chunks[n]);
            CHECK(stream.truth.class_ids[n] == again.truth.class_ids[n]);
        }
    }
}

TEST_CASE("novel proportion is honored after the first appearance") {
    StreamConfig config;
    config.n_chunks = 20;
    config.chunk_size = 200;
    config.n_features = 4;
    config.n_novelties = 1;
    config.novel_proportion = 0.2;
    config.seed = 4;

    const Stream stream = generate_stream(config);
    const int event_chunk = stream.truth.events.at(0).chunk_index;
    for (std::size_t n = 0; n < stream.chunks.size(); ++n) {
        long unknown = 0;
        for (int id : stream.truth.class_ids[n]) {
            if (stream.truth.is_unknown(id)) ++unknown;
        }
        if (static_cast<int>(n) < event_chunk) {
            CHECK(unknown == 0);
        } else {
            // single active novelty takes the full novel mass
            CHECK(unknown == 40);
        }
    }
}

TEST_CASE("multiple novelties share mass with recency weighting") {
    StreamConfig config;
    config.n_chunks = 30;
    config.chunk_size = 200;
    config.n_features = 4;
    config.n_novelties = 3;
    config.novel_proportion = 0.3;
    config.seed = 12;

    const Stream stream = generate_stream(config);
    REQUIRE(stream.truth.events.size() == 3);
    const int last_event = stream.truth.events.back().chunk_index;
    const int newest_class = stream.truth.events.back().class_id;

    // after the last appearance: newest gets half of 60 rows, the two older
    // novelties split the rest (within one row per class)
    std::vector<long> per_class(16, 0);
    long unknown_total = 0;
    const std::size_t n = static_cast<std::size_t>(last_event);
    for (int id : stream.truth.class_ids[n]) {
        ++per_class[static_cast<std::size_t>(id)];
        if (stream.truth.is_unknown(id)) ++unknown_total;
    }
    CHECK(unknown_total == 60);
    CHECK(std::abs(per_class[static_cast<std::size_t>(newest_class)] - 30) <= 1);
    for (const auto& e : stream.truth.events) {
        if (e.class_id != newest_class) {
            CHECK(std::abs(per_class[static_cast<std::size_t>(e.class_id)] - 15) <= 1);
        }
    }
}

TEST_CASE("known-class centers move only at drift events") {
    StreamConfig config;
    config.n_chunks = 16;
    config.chunk_size = 300;
    config.n_features = 8;
    config.n_drifts = 1;
    config.n_novelties = 0;
    config.class_separation = 2.0;
    config.seed = 31;

    const Stream stream = generate_stream(config);
    REQUIRE(stream.truth.events.size() == 1);
    const int drift_chunk = stream.truth.events[0].chunk_index;
    REQUIRE(drift_chunk >= 1);

    // across a non-drift boundary the class mean barely moves; across the
    // drift boundary it jumps (centers resampled at separation 2)
    const auto quiet_delta =
        (class_mean(stream, 1, 0) - class_mean(stream, 0, 0)).norm();
    const auto drift_delta =
        (class_mean(stream, static_cast<std::size_t>(drift_chunk), 0) -
         class_mean(stream, static_cast<std::size_t>(drift_chunk - 1), 0))
            .norm();
    CHECK(quiet_delta < 1.0);
    CHECK(drift_delta > 2.0 * quiet_delta);
}

TEST_CASE("class separation scales the distance between known centers") {
    const auto mean_center_distance = [](double separation) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            StreamConfig config;
            config.n_chunks = 2;
            config.chunk_size = 400;
            config.n_features = 10;
            config.class_separation = separation;
            config.seed = 100 + seed;
            const Stream s = generate_stream(config);
            total += (class_mean(s, 0, 0) - class_mean(s, 0, 1)).norm();
        }
        return total / 10.0;
    };
    const double ratio = mean_center_distance(3.0) / mean_center_distance(1.0);
    CHECK(ratio >= 2.5);
    CHECK(ratio <= 3.5);
}

TEST_CASE("stream files round-trip bit-exactly") {
    StreamConfig config;
    config.n_chunks = 6;
    config.chunk_size = 40;
    config.n_features = 7;
    config.n_novelties = 1;
    config.novel_proportion = 0.1;
    config.seed = 21;
    const Stream stream = generate_stream(config);

    const auto dir = std::filesystem::temp_directory_path() / "owadd_streamio_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "s.owst";

    write_stream(stream, config, path);
    const LoadedStream loaded = read_stream(path);
    REQUIRE(loaded.stream.chunks.size() == stream.chunks.size());
    for (std::size_t n = 0; n < stream.chunks.size(); ++n) {
        CHECK(loaded.stream.chunks[n] == stream.chunks[n]);
        CHECK(loaded.stream.truth.class_ids[n] == stream.truth.class_ids[n]);
    }
    CHECK(loaded.config.seed == config.seed);
    CHECK(loaded.stream.truth.events.size() == stream.truth.events.size());

    SUBCASE("two writes produce byte-identical files") {
        const auto path2 = dir / "s2.owst";
        write_stream(stream, config, path2);
        CHECK(read_bytes(path) == read_bytes(path2));
        CHECK(read_bytes(dir / "s.owst.truth.json") == read_bytes(dir / "s2.owst.truth.json"));
    }

    SUBCASE("truncated files are reported as truncation") {
        const std::string bytes = read_bytes(path);
        const auto broken = dir / "broken.owst";
        std::ofstream out(broken, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        out.close();
        std::filesystem::copy_file(dir / "s.owst.truth.json", dir / "broken.owst.truth.json",
                                   std::filesystem::copy_options::overwrite_existing);
        CHECK_THROWS_AS(read_stream(broken), TruncatedStreamFile);
    }

    SUBCASE("a foreign file is reported as malformed") {
        const auto alien = dir / "alien.owst";
        std::ofstream out(alien, std::ios::binary);
        out << "definitely not a stream";
        out.close();
        CHECK_THROWS_AS(read_stream(alien), MalformedStreamFile);
    }

    SUBCASE("future versions are reported as version mismatch") {
        std::string bytes = read_bytes(path);
        bytes[4] = 9; // version field follows the magic
        const auto future = dir / "future.owst";
        std::ofstream out(future, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        CHECK_THROWS_AS(read_stream(future), StreamVersionMismatch);
    }

    SUBCASE("a missing sidecar is malformed, not silently empty") {
        const auto lonely = dir / "lonely.owst";
        std::filesystem::copy_file(path, lonely,
                                   std::filesystem::copy_options::overwrite_existing);
        CHECK_THROWS_AS(read_stream(lonely), MalformedStreamFile);
    }

    SUBCASE("csv export carries one row per sample") {
        const auto csv = dir / "s.csv";
        export_stream_csv(stream, csv);
        std::ifstream in(csv);
        std::string line;
        std::getline(in, line);
        CHECK(line == "chunk,class_id,is_unknown,f0,f1,f2,f3,f4,f5,f6");
        int rows = 0;
        while (std::getline(in, line)) {
            if (!line.empty()) ++rows;
        }
        CHECK(rows == config.n_chunks * config.chunk_size);
    }

    std::filesystem::remove_all(dir);
}
