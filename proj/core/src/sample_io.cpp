#include "deepratio/sample_io.hpp"

#include <stdexcept>

#include <json.hpp>

#include "text_util.hpp"

namespace deepratio::io {

namespace {

std::string covariate_header(const MarkedPointSample& s) {
    std::string h;
    for (std::size_t j = 0; j < s.d_x; ++j) h += ",x" + std::to_string(j);
    if (s.d_y == 1) {
        h += ",y";
    } else {
        for (std::size_t j = 0; j < s.d_y; ++j) h += ",y" + std::to_string(j);
    }
    return h;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const std::string& suffix) {
    return stem.parent_path() / (stem.filename().string() + suffix);
}

}  // namespace

void write_events_csv(const MarkedPointSample& sample, const std::filesystem::path& path) {
    auto os = detail::open_out(path.string());
    os << "time,type,mark" << covariate_header(sample) << '\n';
    for (const auto& ev : sample.events) {
        os << detail::fmt17(ev.time) << ',' << ev.type << ',' << ev.mark;
        for (double v : ev.x) os << ',' << detail::fmt17(v);
        for (double v : ev.y) os << ',' << detail::fmt17(v);
        os << '\n';
    }
}

void write_metadata(const MarkedPointSample& sample, const std::filesystem::path& path) {
    nlohmann::json counts = nlohmann::json::array();
    const auto c = sample.class_counts();
    for (int cls = 0; cls < sample.n_classes(); ++cls) {
        const auto [i, k] = decode_class(cls, sample.n_marks);
        counts.push_back({{"type", i}, {"mark", k}, {"count", c[static_cast<std::size_t>(cls)]}});
    }
    const nlohmann::json j{{"model", sample.source},     {"horizon", sample.horizon}, {"seed", sample.seed},
                           {"n_types", sample.n_types},  {"n_marks", sample.n_marks}, {"d_x", sample.d_x},
                           {"d_y", sample.d_y},          {"n_events", sample.events.size()},
                           {"grid_step", sample.covariate_grid.step}, {"counts", counts}};
    auto os = detail::open_out(path.string());
    os << j.dump(2) << '\n';
}

void write_covariate_grid(const MarkedPointSample& sample, const std::filesystem::path& path) {
    auto os = detail::open_out(path.string());
    os << "t" << covariate_header(sample) << '\n';
    const auto& g = sample.covariate_grid;
    for (std::size_t r = 0; r < g.rows(); ++r) {
        os << detail::fmt17(static_cast<double>(r) * g.step);
        for (double v : g.row(r)) os << ',' << detail::fmt17(v);
        os << '\n';
    }
}

void save_sample(const MarkedPointSample& sample, const std::filesystem::path& stem) {
    if (!stem.parent_path().empty()) std::filesystem::create_directories(stem.parent_path());
    write_events_csv(sample, with_suffix(stem, ".csv"));
    write_metadata(sample, with_suffix(stem, ".json"));
    if (sample.covariate_grid.rows() > 0) write_covariate_grid(sample, with_suffix(stem, "_grid.csv"));
}

MarkedPointSample load_sample(const std::filesystem::path& stem) {
    MarkedPointSample s;
    {
        auto is = detail::open_in(with_suffix(stem, ".json").string());
        const auto j = nlohmann::json::parse(is);
        s.source = j.at("model").get<std::string>();
        s.horizon = j.at("horizon").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.n_types = j.at("n_types").get<int>();
        s.n_marks = j.at("n_marks").get<int>();
        s.d_x = j.at("d_x").get<std::size_t>();
        s.d_y = j.at("d_y").get<std::size_t>();
        s.covariate_grid.step = j.value("grid_step", 0.0);
    }
    const std::size_t width = 3 + s.d_x + s.d_y;
    {
        auto is = detail::open_in(with_suffix(stem, ".csv").string());
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto cells = detail::split_csv_line(line);
            if (cells.size() != width) throw std::runtime_error("malformed event row: " + line);
            EventRecord ev;
            ev.time = detail::parse_double(cells[0]);
            ev.type = std::stoi(cells[1]);
            ev.mark = std::stoi(cells[2]);
            for (std::size_t j = 0; j < s.d_x; ++j) ev.x.push_back(detail::parse_double(cells[3 + j]));
            for (std::size_t j = 0; j < s.d_y; ++j) ev.y.push_back(detail::parse_double(cells[3 + s.d_x + j]));
            s.events.push_back(std::move(ev));
        }
    }
    const auto grid_path = with_suffix(stem, "_grid.csv");
    if (std::filesystem::exists(grid_path)) {
        auto is = detail::open_in(grid_path.string());
        s.covariate_grid.dim = s.d_x + s.d_y;
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto cells = detail::split_csv_line(line);
            for (std::size_t j = 1; j < cells.size(); ++j) s.covariate_grid.values.push_back(detail::parse_double(cells[j]));
        }
    }
    return s;
}

}  // namespace deepratio::io
