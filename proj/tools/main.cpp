// mvlab: batch experiment runner for the McKean-Vlasov laboratory.
//
// Subcommands: simulate, certify, generator-check, decay, transport,
// semigroup, contraction, invariant, describe. Configuration is a flat
// key=value table assembled from built-in defaults, an optional
// MVLAB_DEFAULTS file, an optional --config file (TOML subset or JSON), and
// command-line flags, in that order of precedence. Outputs are deterministic:
// same resolved config, same bytes, regardless of --workers.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvlab/ergodicity.hpp"
#include "mvlab/systems.hpp"
#include "mvlab/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mvlab;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Options = std::map<std::string, std::string>;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Config loading: flat TOML subset ([section] headers plus key = value) or a
// JSON object (nested one level, flattened to section.key).

std::string strip(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

void flatten_json(const json& j, const std::string& prefix, Options& out) {
    for (const auto& [k, v] : j.items()) {
        std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten_json(v, key, out);
        } else if (v.is_string()) {
            out[key] = v.get<std::string>();
        } else if (v.is_boolean()) {
            out[key] = v.get<bool>() ? "true" : "false";
        } else if (v.is_number()) {
            out[key] = fmt(v.get<double>());
        } else {
            out[key] = v.dump();
        }
    }
}

void load_config_file(const std::string& path, Options& out) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config file not found: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    std::string text = buf.str();
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ConfigError("config file is not a valid JSON object: " + path);
        flatten_json(j, "", out);
        return;
    }
    std::istringstream lines(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = strip(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = strip(line.substr(0, eq));
        std::string val = unquote(strip(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        out[section.empty() ? key : section + "." + key] = val;
    }
}

// Built-in defaults table. Every numeric default used anywhere in the tool
// lives here, so a config file or flag can override any of them.
Options builtin_defaults(const std::string& experiment) {
    Options d{
        {"system", "ex5_1"},
        {"seed", "0"},
        {"format", "csv"},
        {"sim.dt", "0.001"},
        {"sim.particles", "10000"},
        {"sim.steps", "1000"},
        {"sim.record_every", "25"},
        {"init.kind", "dirac"},
        {"init.center", "1"},
        {"init.spread", "0.5"},
        {"init.seed", "123"},
        {"fd.step", "1e-05"},
    };
    if (experiment == "certify") {
        d["certify.samples"] = "1000";
        d["certify.radius"] = "2";
        d["certify.min_particles"] = "1";
        d["certify.max_particles"] = "64";
    } else if (experiment == "generator-check") {
        d["generator.samples"] = "100";
        d["generator.tolerance"] = "0.0001";
        d["generator.max_particles"] = "16";
    } else if (experiment == "decay") {
        d["system"] = "ex5_2";
        d["seed"] = "9";
        d["sim.steps"] = "1500";
        d["init.kind"] = "uniform";
        d["decay.start_frac"] = "0.1";
        d["decay.end_frac"] = "0.6";
    } else if (experiment == "semigroup") {
        d["system"] = "ex5_3";
        d["sim.dt"] = "0.0025";
        d["sim.particles"] = "1000";
        d["semigroup.s"] = "0.25";
        d["semigroup.t"] = "0.25";
        d["semigroup.inner"] = "64";
        d["semigroup.batches"] = "8";
    } else if (experiment == "contraction") {
        d["system"] = "ex5_3";
        d["sim.particles"] = "2000";
        d["sim.steps"] = "2000";
        d["sim.record_every"] = "100";
        d["contraction.x"] = "1";
        d["contraction.y"] = "0";
        d["contraction.mu"] = "1";
        d["contraction.nu"] = "0";
    } else if (experiment == "invariant") {
        d["system"] = "ex5_2";
        d["sim.steps"] = "3000";
        d["sim.particles"] = "2000";
        d["sim.record_every"] = "50";
        d["init.kind"] = "normal";
        d["init.spread"] = "0.3";
        d["invariant.burn_in_frac"] = "0.5";
        d["invariant.cesaro"] = "true";
    } else if (experiment == "transport") {
        d["transport.n"] = "16";
        d["transport.radius"] = "2";
    }
    return d;
}

double get_double(const Options& o, const std::string& key) {
    auto it = o.find(key);
    if (it == o.end()) throw ConfigError("missing config key: " + key);
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + it->second);
    }
}

std::uint64_t get_u64(const Options& o, const std::string& key) {
    double v = get_double(o, key);
    if (v < 0 || v != std::floor(v)) throw ConfigError("config key " + key + " must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::string get_str(const Options& o, const std::string& key) {
    auto it = o.find(key);
    if (it == o.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

bool get_bool(const Options& o, const std::string& key) {
    std::string v = get_str(o, key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key " + key + " is not a boolean: " + v);
}

// ---------------------------------------------------------------------------
// Output plumbing.

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Run id derived from the resolved config; out and workers are excluded so
// relocating output or changing parallelism never forks the id.
std::string run_id(const Options& o, const std::string& experiment) {
    std::string blob = "experiment=" + experiment + "\n";
    for (const auto& [k, v] : o)
        if (k != "out" && k != "workers") blob += k + "=" + v + "\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(blob));
    return buf;
}

struct RunDir {
    fs::path dir;
    void write(const std::string& name, const std::string& content) const {
        std::ofstream os(dir / name, std::ios::binary);
        os << content;
        if (!os) throw std::runtime_error("failed to write " + (dir / name).string());
    }
};

RunDir open_run_dir(const Options& o, const std::string& experiment) {
    fs::path base = o.count("out") ? fs::path(o.at("out")) : fs::path("mvlab-out");
    RunDir rd{base / experiment / run_id(o, experiment)};
    fs::create_directories(rd.dir);
    json manifest;
    manifest["experiment"] = experiment;
    manifest["version"] = kVersion;
    manifest["seed"] = get_str(o, "seed");
    json cfg = json::object();
    for (const auto& [k, v] : o)
        if (k != "out" && k != "workers") cfg[k] = v;
    manifest["config"] = cfg;
    manifest["excluded"] = {"out", "workers"};
    rd.write("manifest.json", manifest.dump(2) + "\n");
    return rd;
}

SimConfig sim_config(const Options& o) {
    SimConfig cfg;
    cfg.dt = get_double(o, "sim.dt");
    cfg.steps = get_u64(o, "sim.steps");
    cfg.particles = get_u64(o, "sim.particles");
    cfg.record_every = get_u64(o, "sim.record_every");
    cfg.seed = get_u64(o, "seed");
    cfg.workers = o.count("workers") ? get_u64(o, "workers") : 1;
    cfg.validate();
    return cfg;
}

EmpiricalMeasure build_init(const Options& o, std::size_t particles) {
    std::string kind = get_str(o, "init.kind");
    double center = get_double(o, "init.center");
    double spread = get_double(o, "init.spread");
    NoiseStream rng(get_u64(o, "init.seed"));
    std::vector<double> xs(particles);
    for (std::size_t i = 0; i < particles; ++i) {
        if (kind == "dirac")
            xs[i] = center;
        else if (kind == "uniform")
            xs[i] = center + spread * (2.0 * rng.uniform(i, 0, 0) - 1.0);
        else if (kind == "normal")
            xs[i] = center + spread * rng.normal(i, 0, 0);
        else
            throw ConfigError("init.kind must be dirac, uniform, or normal: " + kind);
    }
    return EmpiricalMeasure::from_scalars(xs);
}

const NamedSystem& system_for(const Options& o) {
    try {
        return builtin(get_str(o, "system"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::string series_csv(const std::vector<std::tuple<double, std::string, double, double>>& rows) {
    std::string out = "t,quantity,value,std_error\n";
    for (const auto& [t, q, v, se] : rows)
        out += fmt(t) + "," + q + "," + fmt(v) + "," + fmt(se) + "\n";
    return out;
}

std::string cloud_csv(const EmpiricalMeasure& mu) {
    std::ostringstream os;
    save_cloud_csv(mu, os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Experiments.

int run_simulate(const Options& o) {
    const NamedSystem& sys = system_for(o);
    SimConfig cfg = sim_config(o);
    Trajectory traj = simulate(sys.field, build_init(o, cfg.particles), cfg);
    std::vector<std::tuple<double, std::string, double, double>> rows;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const EmpiricalMeasure& c = traj.clouds[k];
        rows.emplace_back(traj.times[k], "mean", mean1d(c), 0.0);
        rows.emplace_back(traj.times[k], "second_moment", second_moment_sq(c), 0.0);
        rows.emplace_back(traj.times[k], "ev",
                          integrate(c, [&](const Vec& p) { return sys.V.value(p, c); }), 0.0);
    }
    RunDir rd = open_run_dir(o, "simulate");
    rd.write("series.csv", series_csv(rows));
    rd.write("cloud_final.csv", cloud_csv(traj.terminal()));
    return 0;
}

int run_certify(const Options& o) {
    const NamedSystem& sys = system_for(o);
    CertSampler sampler;
    sampler.radius = get_double(o, "certify.radius");
    sampler.min_particles = get_u64(o, "certify.min_particles");
    sampler.max_particles = get_u64(o, "certify.max_particles");
    sampler.seed = get_u64(o, "seed");
    const CoefficientField* bar = sys.bar_field ? &*sys.bar_field : nullptr;
    const TwoPointFunction* v2 = sys.V2 ? &*sys.V2 : nullptr;
    CertReport rep = check_certificate(sys.field, bar, &sys.V, v2, sys.certificate, sampler,
                                       get_u64(o, "certify.samples"));
    RunDir rd = open_run_dir(o, "certify");
    rd.write("report.json", rep.json() + "\n");
    std::string vio = "which,x,lhs,rhs,margin\n";
    for (const auto& v : rep.violations)
        vio += v.which + "," + fmt(v.x[0]) + "," + fmt(v.lhs) + "," + fmt(v.rhs) + "," +
               fmt(v.margin) + "\n";
    rd.write("violations.csv", vio);
    return rep.passed ? 0 : 1;
}

int run_generator_check(const Options& o) {
    const NamedSystem& sys = system_for(o);
    std::size_t samples = get_u64(o, "generator.samples");
    double tol = get_double(o, "generator.tolerance");
    std::size_t maxm = get_u64(o, "generator.max_particles");
    NoiseStream rng(get_u64(o, "seed"));
    std::string csv = "x,analytic,fd,rel_err\n";
    bool ok = true;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        std::uint64_t ctr = 0;
        auto draw = [&] { return 2.0 * (2.0 * rng.uniform(s, ctr++, 3) - 1.0); };
        std::size_t m = 1 + static_cast<std::size_t>(rng.uniform(s, ctr++, 4) * maxm) % maxm;
        std::vector<double> pts(m);
        for (auto& p : pts) p = draw();
        EmpiricalMeasure mu = EmpiricalMeasure::from_scalars(pts);
        Vec x{draw()};
        double a = generator_L(sys.V, sys.field, 0.0, x, mu);
        double f = generator_L_fd(sys.V, sys.field, 0.0, x, mu);
        double rel = std::abs(a - f) / (1.0 + std::abs(a));
        worst = std::max(worst, rel);
        ok = ok && rel <= tol;
        csv += fmt(x[0]) + "," + fmt(a) + "," + fmt(f) + "," + fmt(rel) + "\n";
    }
    RunDir rd = open_run_dir(o, "generator-check");
    rd.write("samples.csv", csv);
    json rep{{"samples", samples}, {"tolerance", tol}, {"worst_rel_err", worst}, {"passed", ok}};
    rd.write("report.json", rep.dump(2) + "\n");
    return ok ? 0 : 1;
}

int run_decay(const Options& o) {
    const NamedSystem& sys = system_for(o);
    SimConfig cfg = sim_config(o);
    DecayExperiment exp =
        decay_experiment(sys.V, sys.field, build_init(o, cfg.particles), cfg,
                         get_double(o, "decay.start_frac"), get_double(o, "decay.end_frac"));
    std::vector<std::tuple<double, std::string, double, double>> rows;
    for (const auto& [t, v] : exp.series) rows.emplace_back(t, "ev", v, 0.0);
    RunDir rd = open_run_dir(o, "decay");
    rd.write("series.csv", series_csv(rows));
    json rep{{"rate", exp.fit.rate},
             {"intercept", exp.fit.intercept},
             {"r2", exp.fit.r2},
             {"points", exp.fit.points},
             {"window_start", exp.window_start},
             {"window_end", exp.window_end}};
    rd.write("fit.json", rep.dump(2) + "\n");
    return 0;
}

EmpiricalMeasure load_cloud_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cloud file not found: " + path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        std::stringstream buf;
        buf << is.rdbuf();
        return load_cloud_json(buf.str());
    }
    return load_cloud_csv(is);
}

int run_transport(const Options& o) {
    EmpiricalMeasure a = [&] {
        if (o.count("transport.a")) return load_cloud_file(get_str(o, "transport.a"));
        std::size_t n = get_u64(o, "transport.n");
        double r = get_double(o, "transport.radius");
        NoiseStream rng(get_u64(o, "seed"));
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = r * (2.0 * rng.uniform(i, 0, 10) - 1.0);
        return EmpiricalMeasure::from_scalars(xs);
    }();
    EmpiricalMeasure b = [&] {
        if (o.count("transport.b")) return load_cloud_file(get_str(o, "transport.b"));
        std::size_t n = get_u64(o, "transport.n");
        double r = get_double(o, "transport.radius");
        NoiseStream rng(get_u64(o, "seed") + 1);
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = r * (2.0 * rng.uniform(i, 0, 10) - 1.0);
        return EmpiricalMeasure::from_scalars(xs);
    }();

    json rep;
    rep["w1"] = wasserstein_p(a, b, 1.0);
    rep["w2"] = wasserstein_p(a, b, 2.0);
    auto u2 = CostFunction::from_difference_1d([](double u) { return u * u; }, true);
    auto u4 = CostFunction::from_difference_1d([](double u) { return u * u * u * u; }, true);
    bool ok = true;
    if (a.dim() == 1 && b.dim() == 1) {
        rep["wv_u2"] = quasi_wasserstein(a, b, u2);
        rep["wv_u4"] = quasi_wasserstein(a, b, u4);
        rep["levy_prohorov"] = levy_prohorov_1d(a, b);
        for (double p : {1.0, 2.0}) {
            ProhorovReport pr = check_prohorov_bound(a, b, p);
            std::string key = p == 1.0 ? "prohorov_p1" : "prohorov_p2";
            rep[key] = {{"wp", pr.wp}, {"omega", pr.omega}, {"bound", pr.bound},
                        {"margin", pr.margin}, {"ok", pr.ok}};
            ok = ok && pr.ok;
        }
    }
    rep["passed"] = ok;
    RunDir rd = open_run_dir(o, "transport");
    rd.write("distances.json", rep.dump(2) + "\n");
    return ok ? 0 : 1;
}

int run_semigroup(const Options& o) {
    const NamedSystem& sys = system_for(o);
    const CoefficientField& bar = sys.bar_field ? *sys.bar_field : sys.field;
    SimConfig cfg = sim_config(o);
    auto f = [](const Vec& x, const EmpiricalMeasure&) { return std::tanh(x[0]); };
    SemigroupReport rep = check_semigroup(
        f, sys.field, bar, Vec{get_double(o, "init.center")},
        EmpiricalMeasure::dirac1d(0.0), get_double(o, "semigroup.s"),
        get_double(o, "semigroup.t"), cfg, get_u64(o, "semigroup.inner"),
        get_u64(o, "semigroup.batches"));
    json j{{"f", "tanh"},
           {"s", get_double(o, "semigroup.s")},
           {"t", get_double(o, "semigroup.t")},
           {"direct", {{"value", rep.direct.value}, {"std_error", rep.direct.std_error}}},
           {"nested", {{"value", rep.nested.value}, {"std_error", rep.nested.std_error}}},
           {"difference", rep.difference},
           {"combined_std_error", rep.combined_std_error},
           {"batches", rep.batches},
           {"passed", rep.ok}};
    RunDir rd = open_run_dir(o, "semigroup");
    rd.write("report.json", j.dump(2) + "\n");
    return rep.ok ? 0 : 1;
}

int run_contraction(const Options& o) {
    const NamedSystem& sys = system_for(o);
    if (!sys.bar_field || !sys.V2 || sys.certificate.kind != Certificate::Kind::TwoPoint)
        throw ConfigError("contraction requires a system with a TwoPoint certificate (ex5_3)");
    SimConfig cfg = sim_config(o);
    ContractionReport rep = contraction_experiment(
        sys.field, *sys.bar_field, *sys.V2, Vec{get_double(o, "contraction.x")},
        EmpiricalMeasure::dirac1d(get_double(o, "contraction.mu")),
        Vec{get_double(o, "contraction.y")},
        EmpiricalMeasure::dirac1d(get_double(o, "contraction.nu")), sys.certificate, cfg);
    std::vector<std::tuple<double, std::string, double, double>> rows;
    for (const auto& e : rep.entries) {
        rows.emplace_back(e.t, "ev2", e.ev2, e.ev2_se);
        rows.emplace_back(e.t, "ev2_bound", e.ev2_bound, 0.0);
        rows.emplace_back(e.t, "wv", e.wv, 0.0);
        rows.emplace_back(e.t, "wv_bound", e.wv_bound, 0.0);
    }
    RunDir rd = open_run_dir(o, "contraction");
    rd.write("series.csv", series_csv(rows));
    json j{{"passed", rep.ok}};
    if (rep.first_violation_time) j["first_violation_time"] = *rep.first_violation_time;
    rd.write("report.json", j.dump(2) + "\n");
    return rep.ok ? 0 : 1;
}

int run_invariant(const Options& o) {
    const NamedSystem& sys = system_for(o);
    SimConfig cfg = sim_config(o);
    double burn_in = get_double(o, "invariant.burn_in_frac") * cfg.horizon();
    InvariantEstimate est = estimate_invariant(sys.field, build_init(o, cfg.particles), cfg,
                                               burn_in, get_bool(o, "invariant.cesaro"));
    RunDir rd = open_run_dir(o, "invariant");
    rd.write("cloud.csv", cloud_csv(est.cloud));
    json j{{"stationarity_gap", est.stationarity_gap},
           {"burn_in", est.burn_in},
           {"horizon", est.horizon},
           {"cesaro", est.cesaro},
           {"mean", mean1d(est.cloud)},
           {"second_moment", second_moment_sq(est.cloud)}};
    rd.write("report.json", j.dump(2) + "\n");
    return 0;
}

int run_describe(const Options& o, const std::string& format) {
    const NamedSystem& sys = system_for(o);
    json cert;
    switch (sys.certificate.kind) {
        case Certificate::Kind::H2:
            cert = {{"kind", "H2"}, {"lambda", sys.certificate.lambda},
                    {"lambda_tilde", sys.certificate.lambda_tilde}};
            break;
        case Certificate::Kind::H6:
            cert = {{"kind", "H6"}, {"gamma", sys.certificate.gamma}};
            break;
        case Certificate::Kind::TwoPoint:
            cert = {{"kind", "TwoPoint"}, {"gamma", sys.certificate.gamma},
                    {"beta", sys.certificate.beta}, {"gamma_bar", sys.certificate.gamma_bar},
                    {"beta_bar", sys.certificate.beta_bar},
                    {"strict_rates", sys.certificate.strict_rates}};
            break;
    }
    if (format == "json") {
        json j{{"name", sys.name}, {"description", sys.description}, {"certificate", cert}};
        json cf = json::object();
        for (const auto& [k, v] : sys.closed_forms) cf[k] = v;
        j["closed_forms"] = cf;
        j["citations"] = sys.citations;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << sys.name << ": " << sys.description << "\n\ncertificate: " << cert.dump()
                  << "\n\nclosed forms:\n";
        for (const auto& [k, v] : sys.closed_forms) std::cout << "  " << k << ": " << v << "\n";
        std::cout << "\nreferences:";
        for (const auto& c : sys.citations) std::cout << " [" << c << "]";
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mvlab: McKean-Vlasov simulation and verification laboratory"};
    app.require_subcommand(1);

    std::string config_path, system_name, out_dir, format;
    std::optional<std::uint64_t> seed, workers;
    app.add_option("--config", config_path, "config file (TOML subset or JSON)");
    app.add_option("--system", system_name, "built-in system name");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--workers", workers, "worker threads (never affects results)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    const char* names[] = {"simulate", "certify",     "generator-check", "decay",   "transport",
                           "semigroup", "contraction", "invariant",       "describe"};
    for (const char* n : names) app.add_subcommand(n, "")->fallthrough();

    CLI11_PARSE(app, argc, argv);
    std::string experiment = app.get_subcommands().front()->get_name();

    try {
        Options opts = builtin_defaults(experiment);
        if (const char* env = std::getenv("MVLAB_DEFAULTS")) load_config_file(env, opts);
        if (!config_path.empty()) load_config_file(config_path, opts);
        if (!system_name.empty()) opts["system"] = system_name;
        if (seed) opts["seed"] = std::to_string(*seed);
        if (workers) opts["workers"] = std::to_string(*workers);
        if (!out_dir.empty()) opts["out"] = out_dir;
        if (!format.empty()) opts["format"] = format;

        if (experiment == "simulate") return run_simulate(opts);
        if (experiment == "certify") return run_certify(opts);
        if (experiment == "generator-check") return run_generator_check(opts);
        if (experiment == "decay") return run_decay(opts);
        if (experiment == "transport") return run_transport(opts);
        if (experiment == "semigroup") return run_semigroup(opts);
        if (experiment == "contraction") return run_contraction(opts);
        if (experiment == "invariant") return run_invariant(opts);
        if (experiment == "describe") return run_describe(opts, get_str(opts, "format"));
        std::cerr << "unknown experiment: " << experiment << "\n";
        return 2;
    } catch (const BlowupError& e) {
        std::cerr << "numerical blow-up: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
