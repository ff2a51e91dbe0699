#pragma once

#include <fstream>

#include <json.hpp>

#include "oneshot/channels.hpp"

namespace oneshot::io {

using nlohmann::json;

namespace detail_io {

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
}

inline double finite_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw std::invalid_argument(where + ": expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument(where + ": non-finite value");
    return v;
}

}  // namespace detail_io

/// {"rows": n, "cols": m, "entries": [[re, im], ...]} row-major.
inline ComplexMatrix matrix_from_json(const json& j) {
    detail_io::check_keys(j, {"rows", "cols", "entries"}, "matrix");
    if (!j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
        throw std::invalid_argument("matrix: rows, cols and entries are required");
    std::size_t rows = j.at("rows").get<std::size_t>();
    std::size_t cols = j.at("cols").get<std::size_t>();
    const json& entries = j.at("entries");
    if (!entries.is_array() || entries.size() != rows * cols)
        throw std::invalid_argument("matrix: entry count does not match shape");
    std::vector<complexd> data;
    data.reserve(rows * cols);
    for (const auto& e : entries) {
        if (!e.is_array() || e.size() != 2)
            throw std::invalid_argument("matrix: entries must be [re, im] pairs");
        data.emplace_back(detail_io::finite_number(e[0], "matrix entry"),
                          detail_io::finite_number(e[1], "matrix entry"));
    }
    return ComplexMatrix(rows, cols, std::move(data));
}

inline json matrix_to_json(const ComplexMatrix& m) {
    json entries = json::array();
    for (const auto& z : m.data()) entries.push_back({z.real(), z.imag()});
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

/// [{"label": "A", "dim": 2}, ...]
inline SystemLayout layout_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("layout: expected a factor list");
    std::vector<Factor> fs;
    for (const auto& f : j) {
        detail_io::check_keys(f, {"label", "dim"}, "layout factor");
        fs.push_back(Factor{f.at("label").get<std::string>(), f.at("dim").get<std::size_t>()});
    }
    return SystemLayout(fs);
}

inline json layout_to_json(const SystemLayout& lay) {
    json out = json::array();
    for (const auto& f : lay.factors()) out.push_back({{"label", f.label}, {"dim", f.dim}});
    return out;
}

/// Density file {"layout": ..., "matrix": ...} or pure file {"layout": ...,
/// "vector": [[re, im], ...]}; pure states are returned as projectors.
inline DensityOperator state_from_json(const json& j) {
    detail_io::check_keys(j, {"layout", "matrix", "vector", "normalization"}, "state");
    SystemLayout lay = layout_from_json(j.at("layout"));
    Normalization norm = Normalization::normalized;
    if (j.contains("normalization")) {
        std::string n = j.at("normalization").get<std::string>();
        if (n == "subnormalized")
            norm = Normalization::subnormalized;
        else if (n != "normalized")
            throw std::invalid_argument("state: unknown normalization '" + n + "'");
    }
    if (j.contains("matrix")) {
        return DensityOperator(matrix_from_json(j.at("matrix")), lay, norm);
    }
    if (j.contains("vector")) {
        const json& vec = j.at("vector");
        if (!vec.is_array() || vec.size() != lay.total_dim())
            throw std::invalid_argument("state: vector length does not match layout");
        std::vector<complexd> amp;
        for (const auto& e : vec) {
            if (!e.is_array() || e.size() != 2)
                throw std::invalid_argument("state: vector entries must be [re, im] pairs");
            amp.emplace_back(detail_io::finite_number(e[0], "state amplitude"),
                             detail_io::finite_number(e[1], "state amplitude"));
        }
        return PureState(std::move(amp), lay).to_density();
    }
    throw std::invalid_argument("state: need a matrix or a vector");
}

/// Channel file: explicit Kraus form {"name", "dim_in", "dim_out", "kraus":
/// [matrix, ...]} or the shorthand {"kind", "dim", "param"}.
inline KrausChannel channel_from_json(const json& j) {
    if (j.contains("kind")) {
        detail_io::check_keys(j, {"kind", "dim", "param"}, "channel");
        std::string kind = j.at("kind").get<std::string>();
        std::size_t dim = j.at("dim").get<std::size_t>();
        double param = j.contains("param") ? detail_io::finite_number(j.at("param"), "param") : 0.0;
        if (kind == "identity") return make_channel(ChannelKind::identity, dim, param);
        if (kind == "depolarizing") return make_channel(ChannelKind::depolarizing, dim, param);
        if (kind == "dephasing") return make_channel(ChannelKind::dephasing, dim, param);
        if (kind == "amplitude_damping")
            return make_channel(ChannelKind::amplitude_damping, dim, param);
        if (kind == "erasure") return make_channel(ChannelKind::erasure, dim, param);
        throw std::invalid_argument("channel: unknown kind '" + kind + "'");
    }
    detail_io::check_keys(j, {"name", "dim_in", "dim_out", "kraus"}, "channel");
    if (!j.contains("kraus")) throw std::invalid_argument("channel: kraus list required");
    std::size_t din = j.at("dim_in").get<std::size_t>();
    std::size_t dout = j.at("dim_out").get<std::size_t>();
    std::vector<ComplexMatrix> ks;
    for (const auto& k : j.at("kraus")) {
        ComplexMatrix m = matrix_from_json(k);
        if (m.rows() != dout || m.cols() != din)
            throw std::invalid_argument("channel: Kraus shape does not match dims");
        ks.push_back(std::move(m));
    }
    std::string name = j.contains("name") ? j.at("name").get<std::string>() : "";
    return KrausChannel(std::move(ks), "A", "B", name);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

inline DensityOperator state_from_file(const std::string& path) {
    return state_from_json(read_json_file(path));
}

inline KrausChannel channel_from_file(const std::string& path) {
    return channel_from_json(read_json_file(path));
}

}  // namespace oneshot::io
