#include "fcont/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "fcont/error.hpp"

namespace fcont {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- spaces

json space_to_json(const DiscreteMetricSpace& space, const DiscreteMeasure* measure) {
    json doc;
    doc["points"] = space.labels();
    json rows = json::array();
    for (std::size_t i = 0; i < space.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < space.size(); ++j) row.push_back(space(i, j));
        rows.push_back(std::move(row));
    }
    doc["dist"] = std::move(rows);
    if (!space.coords().empty()) doc["coords"] = space.coords();
    if (measure) doc["weights"] = measure->weights();
    return doc;
}

DiscreteMetricSpace space_from_json(const json& doc) {
    require(doc.is_object() && doc.contains("dist"), "space document needs a \"dist\" matrix");
    for (const auto& [key, _] : doc.items())
        require(key == "points" || key == "dist" || key == "coords" || key == "weights",
                "unknown key in space document: " + key);
    const auto& dist = doc.at("dist");
    require(dist.is_array(), "dist must be an array of rows");
    const std::size_t n = dist.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& row : dist) {
        require(row.is_array() && row.size() == n, "dist must be square");
        for (const auto& v : row) flat.push_back(v.get<double>());
    }
    std::vector<std::string> labels;
    if (doc.contains("points")) {
        for (const auto& p : doc.at("points")) labels.push_back(p.is_string() ? p.get<std::string>() : p.dump());
        require(labels.size() == n, "points and dist sizes differ");
    } else {
        for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    std::vector<std::vector<double>> coords;
    if (doc.contains("coords")) coords = doc.at("coords").get<std::vector<std::vector<double>>>();
    return DiscreteMetricSpace(std::move(labels), std::move(flat), std::move(coords));
}

DiscreteMeasure measure_from_json(const json& doc) {
    require(doc.is_object() && doc.contains("weights"), "document has no \"weights\"");
    return DiscreteMeasure(doc.at("weights").get<std::vector<double>>());
}

std::string space_to_csv(const DiscreteMetricSpace& space) {
    std::string out = "point_i,point_j,distance\n";
    const auto& labels = space.labels();
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = i + 1; j < space.size(); ++j)
            out += labels[i] + "," + labels[j] + "," + format_double(space(i, j)) + "\n";
    return out;
}

DiscreteMetricSpace space_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty edge list");
    std::vector<std::string> labels;
    std::map<std::string, std::size_t> index;
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    auto id = [&](const std::string& s) {
        auto [it, fresh] = index.emplace(s, labels.size());
        if (fresh) labels.push_back(s);
        return it->second;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
        require(c1 != std::string::npos && c2 != std::string::npos, "malformed edge line: " + line);
        const std::size_t i = id(line.substr(0, c1)), j = id(line.substr(c1 + 1, c2 - c1 - 1));
        edges.emplace_back(i, j, std::stod(line.substr(c2 + 1)));
    }
    const std::size_t n = labels.size();
    std::vector<double> dist(n * n, 0.0);
    std::vector<char> seen(n * n, 0);
    for (const auto& [i, j, d] : edges) {
        dist[i * n + j] = dist[j * n + i] = d;
        seen[i * n + j] = seen[j * n + i] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            require(seen[i * n + j], "edge list misses pair " + labels[i] + "," + labels[j]);
    return DiscreteMetricSpace(std::move(labels), std::move(dist));
}

// ---------------------------------------------------------------- ensembles

namespace {

template <class T>
void put_le(std::string& out, T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(v);
    for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    require(pos + sizeof(U) <= in.size(), "ensemble file is truncated");
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b)
        bits |= static_cast<U>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
    pos += sizeof(U);
    return std::bit_cast<T>(bits);
}

}  // namespace

fs::path sidecar_path(const fs::path& bin_path) {
    fs::path p = bin_path;
    p.replace_extension(".meta.json");
    return p;
}

void write_ensemble(const fs::path& bin_path, const FieldEnsemble& ensemble) {
    std::string out = "MCEN";
    put_le<std::uint32_t>(out, 1);
    put_le<std::uint64_t>(out, ensemble.realizations());
    put_le<std::uint64_t>(out, ensemble.points());
    out.reserve(out.size() + 8 * ensemble.values().size());
    for (double v : ensemble.values()) put_le<double>(out, v);

    const auto& g = ensemble.generator();
    json meta;
    meta["generator"] = g.name;
    json params = json::object();
    for (const auto& [k, v] : g.params) params[k] = number(v);
    meta["params"] = params;
    meta["seed"] = g.seed;
    meta["rows"] = ensemble.realizations();
    meta["cols"] = ensemble.points();
    meta["axes"] = ensemble.axes();
    write_atomic(bin_path, out);
    write_atomic(sidecar_path(bin_path), meta.dump(2) + "\n");
}

FieldEnsemble read_ensemble(const fs::path& bin_path) {
    const std::string in = read_file(bin_path);
    require(in.size() >= 24 && in.compare(0, 4, "MCEN") == 0, "not an ensemble file: " + bin_path.string());
    std::size_t pos = 4;
    require(get_le<std::uint32_t>(in, pos) == 1, "unsupported ensemble version");
    const auto rows = get_le<std::uint64_t>(in, pos);
    const auto cols = get_le<std::uint64_t>(in, pos);
    require(in.size() == pos + 8 * rows * cols, "ensemble file size does not match its header");
    std::vector<double> values(rows * cols);
    for (auto& v : values) v = get_le<double>(in, pos);

    GeneratorInfo info;
    std::vector<std::vector<double>> axes;
    const fs::path meta_path = sidecar_path(bin_path);
    if (fs::exists(meta_path)) {
        const json meta = json::parse(read_file(meta_path));
        info.name = meta.value("generator", "");
        info.seed = meta.value("seed", std::uint64_t{0});
        if (meta.contains("params"))
            for (const auto& [k, v] : meta["params"].items())
                if (v.is_number()) info.params[k] = v.get<double>();
        if (meta.contains("axes")) axes = meta["axes"].get<std::vector<std::vector<double>>>();
    }
    return FieldEnsemble(rows, cols, std::move(values), std::move(info), std::move(axes));
}

std::string ensemble_to_csv(const FieldEnsemble& ensemble) {
    std::string out = "realization,point,value\n";
    for (std::size_t r = 0; r < ensemble.realizations(); ++r)
        for (std::size_t x = 0; x < ensemble.points(); ++x)
            out += std::to_string(r) + "," + std::to_string(x) + "," + format_double(ensemble(r, x)) + "\n";
    return out;
}

// ---------------------------------------------------------------- results

std::string knots_to_csv(const KnotFunction& f, const std::string& x_name, const std::string& y_name) {
    std::string out = x_name + "," + y_name + "\n";
    for (const auto& k : f.knots()) out += format_double(k.x) + "," + format_double(k.y) + "\n";
    return out;
}

std::string tau_samples_to_csv(std::span<const double> tau, std::span<const double> tau0) {
    require(tau.size() == tau0.size(), "tau and tau0 sizes differ");
    std::string out = "realization,tau,tau0\n";
    for (std::size_t r = 0; r < tau.size(); ++r)
        out += std::to_string(r) + "," + format_double(tau[r]) + "," + format_double(tau0[r]) + "\n";
    return out;
}

std::string bounds_to_csv(std::span<const BoundRow> rows) {
    std::string out = "delta,empirical,bound\n";
    for (const auto& r : rows)
        out += format_double(r.delta) + "," + format_double(r.empirical) + "," + format_double(r.bound) + "\n";
    return out;
}

json knots_to_json(const KnotFunction& f) {
    json arr = json::array();
    for (const auto& k : f.knots()) arr.push_back({number(k.x), number(k.y)});
    return arr;
}

json factorization_to_json(const FactorizationResult& res) {
    json j;
    j["tag"] = res.tag;
    j["norm"] = res.norm_name;
    j["realizations"] = res.realizations;
    json plan;
    plan["N"] = res.plan.size();
    if (res.plan.nu) plan["nu"] = *res.plan.nu;
    if (res.plan.theta) plan["theta"] = *res.plan.theta;
    plan["a"] = res.plan.a;
    plan["b"] = res.plan.b;
    j["plan"] = plan;
    json knots = json::array();
    std::size_t jj = 0;
    for (std::size_t n = 0; n < res.plan.size(); ++n) {
        json k;
        k["n"] = n + 1;
        k["delta"] = number(res.knots.delta[n]);
        k["a"] = res.plan.a[n];
        k["status"] = to_string(res.knots.status[n]);
        if (jj < res.active.size() && res.active[jj] == n) {
            k["b_active"] = res.b_active[jj];
            k["theta_at_knot"] = number(res.theta_at_knots[jj]);
            ++jj;
        }
        knots.push_back(std::move(k));
    }
    j["knots"] = std::move(knots);
    j["theta"] = knots_to_json(res.theta);
    j["g1"] = knots_to_json(res.g1);
    j["g"] = knots_to_json(res.g);
    j["tau_norm"] = number(res.tau_norm);
    j["tau0_norm"] = number(res.tau0_norm);
    j["ratio_monotone"] = res.ratio_monotone;
    return j;
}

}  // namespace fcont
