#include "fcont/config.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include "fcont/io.hpp"

namespace fcont {

using nlohmann::json;

namespace {

// Walks a JSON object, recording which keys were consumed so leftovers can be
// reported with their full path.
class Reader {
public:
    Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return doc_.contains(key); }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!doc_.contains(key)) return;
        seen_.insert(key);
        try {
            out = doc_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(at(key), "wrong type");
        }
    }

    Reader child(const std::string& key) {
        seen_.insert(key);
        return Reader(doc_.at(key), at(key));
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return doc_.at(key);
    }

    void finish() const {
        for (const auto& [key, _] : doc_.items())
            if (!seen_.count(key)) throw ConfigError(at(key), "unknown key");
    }

private:
    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

void one_of(const std::string& path, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ConfigError(path, "unknown value \"" + v + "\" (expected one of " + list + ")");
}

std::vector<Knot> read_knots(const std::string& path, const json& arr) {
    if (!arr.is_array()) throw ConfigError(path, "expected an array of [x, y] pairs");
    std::vector<Knot> out;
    for (const auto& k : arr) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
            throw ConfigError(path, "expected an array of [x, y] pairs");
        out.push_back({k[0].get<double>(), k[1].get<double>()});
    }
    return out;
}

void read_orlicz(Reader r, OrliczConfig& c) {
    r.get("family", c.family);
    one_of(r.at("family"), c.family, {"power", "exp_power", "gaussian", "table"});
    r.get("param", c.param);
    if (r.has("knots")) c.knots = read_knots(r.at("knots"), r.raw("knots"));
    if (r.has("nabla2")) {
        double k = 0;
        r.get("nabla2", k);
        c.nabla2 = k;
    }
    r.finish();
}

void read_psi(Reader r, PsiConfig& c) {
    r.get("family", c.family);
    one_of(r.at("family"), c.family, {"natural", "degenerate", "constant", "power", "table"});
    r.get("param", c.param);
    r.get("scale", c.scale);
    if (r.has("knots")) c.knots = read_knots(r.at("knots"), r.raw("knots"));
    r.finish();
}

json knots_json(const std::vector<Knot>& ks) {
    json a = json::array();
    for (const auto& k : ks) a.push_back({k.x, k.y});
    return a;
}

json psi_json(const PsiConfig& c) {
    json j{{"family", c.family}, {"param", c.param}, {"scale", c.scale}};
    if (!c.knots.empty()) j["knots"] = knots_json(c.knots);
    return j;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    Reader root(doc, "");
    if (root.has("generator")) {
        Reader r = root.child("generator");
        auto& g = cfg.generator;
        r.get("family", g.family);
        one_of(r.at("family"), g.family, {"brownian", "fbm", "gaussian", "stable", "brownian_sheet", "zero"});
        r.get("points", g.points);
        r.get("dim", g.dim);
        r.get("t_max", g.t_max);
        r.get("realizations", g.realizations);
        r.get("seed", g.seed);
        r.get("hurst", g.hurst);
        r.get("alpha", g.alpha);
        r.get("kernel", g.kernel);
        one_of(r.at("kernel"), g.kernel, {"brownian", "fbm", "squared_exponential"});
        r.get("length_scale", g.length_scale);
        r.finish();
        if (g.points < 2) throw ConfigError(r.at("points"), "need at least 2 points");
        if (g.realizations < 2) throw ConfigError(r.at("realizations"), "need at least 2 realizations");
        if (!(g.t_max > 0.0)) throw ConfigError(r.at("t_max"), "must be positive");
        if (g.dim < 2 || g.dim > 3) throw ConfigError(r.at("dim"), "sheet dimension must be 2 or 3");
    }
    if (root.has("norm")) {
        Reader r = root.child("norm");
        auto& n = cfg.norm;
        r.get("kind", n.kind);
        one_of(r.at("kind"), n.kind, {"orlicz", "gls"});
        if (r.has("orlicz")) read_orlicz(r.child("orlicz"), n.orlicz);
        if (r.has("psi")) read_psi(r.child("psi"), n.psi);
        r.get("p_grid", n.p_grid);
        r.finish();
    }
    if (root.has("plan")) {
        Reader r = root.child("plan");
        auto& p = cfg.plan;
        r.get("nu", p.nu);
        r.get("theta", p.theta);
        r.get("N", p.N);
        r.get("a", p.a);
        r.get("b", p.b);
        r.finish();
        if (p.a.empty() != p.b.empty()) throw ConfigError(r.at("a"), "explicit sequences need both a and b");
    }
    if (root.has("delta_grid")) {
        Reader r = root.child("delta_grid");
        r.get("points", cfg.delta_grid.points);
        r.get("values", cfg.delta_grid.values);
        r.finish();
    }
    if (root.has("pipelines")) {
        const json& arr = root.raw("pipelines");
        if (!arr.is_array()) throw ConfigError("pipelines", "expected an array of pipeline names");
        cfg.pipelines = PipelineFlags{false, false, false, false, false};
        for (const auto& v : arr) {
            if (!v.is_string()) throw ConfigError("pipelines", "expected pipeline names");
            const auto name = v.get<std::string>();
            one_of("pipelines", name, {"factorize", "entropy-bound", "kr-bound", "rectangle", "heavy-tail"});
            if (name == "factorize") cfg.pipelines.factorize = true;
            if (name == "entropy-bound") cfg.pipelines.entropy_bound = true;
            if (name == "kr-bound") cfg.pipelines.kr_bound = true;
            if (name == "rectangle") cfg.pipelines.rectangle = true;
            if (name == "heavy-tail") cfg.pipelines.heavy_tail = true;
        }
    }
    if (root.has("entropy")) {
        Reader r = root.child("entropy");
        if (r.has("psi")) read_psi(r.child("psi"), cfg.entropy.psi);
        r.get("deltas", cfg.entropy.deltas);
        r.get("max_points", cfg.entropy.max_points);
        r.get("nodes", cfg.entropy.nodes);
        r.finish();
    }
    if (root.has("kr")) {
        Reader r = root.child("kr");
        r.get("p", cfg.kr.p);
        r.get("theta_reg", cfg.kr.theta_reg);
        r.get("max_points", cfg.kr.max_points);
        r.finish();
        if (!(cfg.kr.p > cfg.kr.theta_reg && cfg.kr.theta_reg > 0.0))
            throw ConfigError(r.at("theta_reg"), "need p > theta_reg > 0");
    }
    if (root.has("heavy_tail")) {
        Reader r = root.child("heavy_tail");
        r.get("m", cfg.heavy_tail.m);
        r.get("moment_p", cfg.heavy_tail.moment_p);
        r.get("levels", cfg.heavy_tail.levels);
        r.finish();
        if (!(cfg.heavy_tail.m > 0.0)) throw ConfigError(r.at("m"), "must be positive");
    }
    if (root.has("rectangle")) {
        Reader r = root.child("rectangle");
        r.get("direction", cfg.rectangle.direction);
        r.get("points", cfg.rectangle.points);
        r.finish();
    }
    root.get("output", cfg.output);
    if (root.has("threads")) {
        std::size_t t = 0;
        root.get("threads", t);
        cfg.threads = t;
    }
    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    const auto& g = cfg.generator;
    j["generator"] = {{"family", g.family},         {"points", g.points}, {"dim", g.dim},
                      {"t_max", g.t_max},           {"realizations", g.realizations},
                      {"seed", g.seed},             {"hurst", g.hurst},   {"alpha", g.alpha},
                      {"kernel", g.kernel},         {"length_scale", g.length_scale}};
    json orl{{"family", cfg.norm.orlicz.family}, {"param", cfg.norm.orlicz.param}};
    if (!cfg.norm.orlicz.knots.empty()) orl["knots"] = knots_json(cfg.norm.orlicz.knots);
    if (cfg.norm.orlicz.nabla2) orl["nabla2"] = *cfg.norm.orlicz.nabla2;
    j["norm"] = {{"kind", cfg.norm.kind}, {"orlicz", orl}, {"psi", psi_json(cfg.norm.psi)}, {"p_grid", cfg.norm.p_grid}};
    j["plan"] = {{"nu", cfg.plan.nu}, {"theta", cfg.plan.theta}, {"N", cfg.plan.N}};
    if (!cfg.plan.a.empty()) {
        j["plan"]["a"] = cfg.plan.a;
        j["plan"]["b"] = cfg.plan.b;
    }
    j["delta_grid"] = {{"points", cfg.delta_grid.points}};
    if (!cfg.delta_grid.values.empty()) j["delta_grid"]["values"] = cfg.delta_grid.values;
    json pipes = json::array();
    if (cfg.pipelines.factorize) pipes.push_back("factorize");
    if (cfg.pipelines.entropy_bound) pipes.push_back("entropy-bound");
    if (cfg.pipelines.kr_bound) pipes.push_back("kr-bound");
    if (cfg.pipelines.rectangle) pipes.push_back("rectangle");
    if (cfg.pipelines.heavy_tail) pipes.push_back("heavy-tail");
    j["pipelines"] = pipes;
    j["entropy"] = {{"psi", psi_json(cfg.entropy.psi)},
                    {"deltas", cfg.entropy.deltas},
                    {"max_points", cfg.entropy.max_points},
                    {"nodes", cfg.entropy.nodes}};
    j["kr"] = {{"p", cfg.kr.p}, {"theta_reg", cfg.kr.theta_reg}, {"max_points", cfg.kr.max_points}};
    j["heavy_tail"] = {{"m", cfg.heavy_tail.m}, {"moment_p", cfg.heavy_tail.moment_p}, {"levels", cfg.heavy_tail.levels}};
    j["rectangle"] = {{"direction", cfg.rectangle.direction}, {"points", cfg.rectangle.points}};
    j["output"] = cfg.output;
    if (cfg.threads) j["threads"] = *cfg.threads;
    return j;
}

OrliczFunction make_orlicz(const OrliczConfig& c) {
    OrliczFunction phi = c.family == "power"       ? OrliczFunction::power(c.param)
                         : c.family == "exp_power" ? OrliczFunction::exp_power(c.param)
                         : c.family == "gaussian"  ? OrliczFunction::gaussian()
                                                   : OrliczFunction::table(c.knots);
    return c.nabla2 ? phi.with_nabla2(*c.nabla2) : phi;
}

PsiFunction make_psi(const PsiConfig& c, const FieldEnsemble* ensemble, const std::vector<double>& p_grid) {
    if (c.family == "natural") {
        require(ensemble != nullptr, "the natural psi needs an ensemble");
        return natural_psi(*ensemble, p_grid);
    }
    if (c.family == "degenerate") return PsiFunction::degenerate(c.param);
    if (c.family == "constant") return PsiFunction::constant(c.param);
    if (c.family == "power") return PsiFunction::power(c.param, c.scale);
    return PsiFunction::table(c.knots);
}

NormSpec make_norm(const NormConfig& c, const FieldEnsemble* ensemble) {
    if (c.kind == "orlicz") return make_orlicz(c.orlicz);
    PsiFunction psi = make_psi(c.psi, ensemble, c.p_grid);
    std::vector<double> grid = c.p_grid;
    if (psi.is_degenerate()) grid = {*psi.pin()};
    return GlsNorm{std::move(psi), std::move(grid)};
}

SequencePlan make_plan(const PlanConfig& c) {
    if (!c.a.empty()) return SequencePlan::from_sequences(c.a, c.b);
    return default_sequences(c.nu, c.theta, c.N);
}

bool is_line_family(const std::string& family) { return family != "brownian_sheet"; }

std::vector<double> generator_grid(const GeneratorConfig& cfg) { return linspace(0.0, cfg.t_max, cfg.points); }

FieldEnsemble generate(const GeneratorConfig& cfg) {
    const auto grid = generator_grid(cfg);
    const std::size_t M = cfg.realizations;
    if (cfg.family == "brownian") return simulate_brownian(grid, M, cfg.seed);
    if (cfg.family == "fbm") return simulate_fbm(cfg.hurst, grid, M, cfg.seed);
    if (cfg.family == "stable") return simulate_stable(cfg.alpha, grid, M, cfg.seed);
    if (cfg.family == "brownian_sheet")
        return simulate_brownian_sheet(std::vector<std::vector<double>>(cfg.dim, grid), M, cfg.seed);
    if (cfg.family == "zero") {
        GeneratorInfo info{"zero", {}, cfg.seed};
        return FieldEnsemble(M, grid.size(), std::vector<double>(M * grid.size(), 0.0), info);
    }
    // gaussian with a named kernel
    Eigen::MatrixXd cov;
    if (cfg.kernel == "brownian") {
        cov = brownian_covariance(grid);
    } else if (cfg.kernel == "fbm") {
        cov = fbm_covariance(cfg.hurst, grid);
    } else {
        const std::size_t n = grid.size();
        cov.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double u = (grid[i] - grid[j]) / cfg.length_scale;
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(-0.5 * u * u);
            }
    }
    auto ens = simulate_gaussian_field(cov, M, cfg.seed);
    return ens;
}

}  // namespace fcont
