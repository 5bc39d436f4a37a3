#include "lindley/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "lindley/cusum.hpp"
#include "lindley/density.hpp"
#include "lindley/fet.hpp"
#include "lindley/oracle.hpp"

namespace lindley::cli {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Serialises doubles with 17 significant digits in JSON too.
ordered_json jnum(double v) {
    if (!std::isfinite(v)) return nullptr;
    return ordered_json::parse(num(v));
}

class BadInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Record {
    std::string command;
    ordered_json metadata = ordered_json::object();
    std::optional<double> atom;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    ordered_json diagnostics = ordered_json::object();
};

std::string render_csv(const std::vector<Record>& records) {
    std::ostringstream os;
    for (const auto& r : records) {
        os << "# command=" << r.command;
        for (const auto& [k, v] : r.metadata.items()) {
            os << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
        }
        os << '\n';
        if (r.atom) os << "# atom=" << num(*r.atom) << '\n';
        if (!r.diagnostics.empty()) {
            os << "#";
            for (const auto& [k, v] : r.diagnostics.items()) {
                os << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
            }
            os << '\n';
        }
        for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
        os << '\n';
        for (const auto& row : r.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << num(row[i]);
            os << '\n';
        }
    }
    return os.str();
}

std::string render_json(const std::vector<Record>& records) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : records) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = r.command;
        j["metadata"] = r.metadata;
        j["atom"] = r.atom ? jnum(*r.atom) : ordered_json(nullptr);
        j["columns"] = r.columns;
        ordered_json rows = ordered_json::array();
        for (const auto& row : r.rows) {
            ordered_json jr = ordered_json::array();
            for (double v : row) jr.push_back(jnum(v));
            rows.push_back(std::move(jr));
        }
        j["rows"] = std::move(rows);
        j["diagnostics"] = r.diagnostics;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

ordered_json params_json(const ProcessConfig& cfg) {
    ordered_json p;
    p["mu"] = jnum(cfg.params.mu);
    p["sigma"] = jnum(cfg.params.sigma);
    p["x"] = jnum(cfg.x);
    if (cfg.h) p["h"] = jnum(*cfg.h);
    return p;
}

std::string position_method(const ProcessConfig& cfg, int n) {
    if (n == 0) return "position/initial-point-mass";
    if (n == 1) return "position/one-step-law";
    switch (dispatch_position_regime(cfg)) {
        case PositionRegime::PosMuNonNeg: return "position/mu>=0";
        case PositionRegime::PosMuNegSmall:
            return cfg.x + n * cfg.params.mu > snap_tolerance(cfg) ? "position/-x<mu<0/case-x+n*mu>0"
                                                                    : "position/-x<mu<0/case-x+n*mu<=0";
        case PositionRegime::PosMuNegLarge: return "position/mu<=-x";
    }
    return "?";
}

std::string fet_method(FetRegime r) {
    switch (r) {
        case FetRegime::FetMuPosLtH: return "exit/0<mu<h";
        case FetRegime::FetMuPosGeH: return "exit/0<h<=mu";
        case FetRegime::FetMuNeg: return "exit/mu<0,-mu<h";
        case FetRegime::FetMuNegGeH: return "exit/0<h<=-mu";
        case FetRegime::FetMuZero: return "exit/mu=0";
    }
    return "?";
}

struct Grid {
    double lo = 0.0, hi = 0.0, step = 0.0;
    bool given = false;
};

Grid parse_grid(const std::string& s) {
    Grid g;
    if (s.empty()) return g;
    double v[3];
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        const auto colon = s.find(':', pos);
        if ((i < 2) == (colon == std::string::npos)) throw BadInput("--grid must look like lo:hi:step");
        const auto part = s.substr(pos, i < 2 ? colon - pos : std::string::npos);
        try {
            std::size_t used = 0;
            v[i] = std::stod(part, &used);
            if (used != part.size()) throw BadInput("");
        } catch (const std::exception&) {
            throw BadInput("--grid must look like lo:hi:step");
        }
        pos = colon + 1;
    }
    g = {v[0], v[1], v[2], true};
    if (!(g.lo >= 0.0) || !(g.hi > g.lo) || !(g.step > 0.0)) {
        throw BadInput("--grid needs 0 <= lo < hi and step > 0");
    }
    if ((g.hi - g.lo) / g.step > 1e7) throw BadInput("--grid has more than 1e7 points");
    return g;
}

std::vector<double> grid_points(const Grid& g) {
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((g.hi - g.lo) / g.step + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(g.lo + static_cast<double>(i) * g.step);
    return out;
}

// Continuous part at u, with the right limit at u = 0.
double density_value(const MixedDensity& d, double u) {
    if (d.segments.empty()) return 0.0;
    if (u == 0.0) return evaluate_segment(d.segments.front(), 0.0, d.params.sigma);
    return evaluate_mixed_density(d, u);
}

struct Common {
    double mu = 0.0;
    std::vector<double> sigma{1.0};
    double x = 0.0;
    std::optional<double> h;
    std::string format = "csv";
    std::string out;
};

void add_common(CLI::App* sub, Common& c, bool with_h) {
    sub->add_option("--mu", c.mu, "increment location")->required();
    sub->add_option("--sigma", c.sigma, "increment scale (comma-separated list allowed)")->delimiter(',');
    sub->add_option("--x", c.x, "start position");
    if (with_h) sub->add_option("--h", c.h, "upper boundary");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out, "output file (default stdout)");
}

void check_mass(const MixedDensity& d) {
    const double defect = std::abs(total_mass(d) - 1.0);
    if (!(defect <= 1e-6)) {
        throw InvariantError("mass defect " + num(defect) + " exceeds 1e-6 at n = " + std::to_string(d.n));
    }
}

std::vector<Record> cmd_density(const Common& c, const std::vector<int>& ns, const std::string& grid_spec) {
    if (ns.empty()) throw BadInput("--n is required");
    if (ns.size() > 1 && c.sigma.size() > 1) throw BadInput("sweep either --n or --sigma, not both");
    const Grid grid = parse_grid(grid_spec);
    std::vector<Record> out;
    for (double sigma : c.sigma) {
        ProcessConfig cfg{{c.mu, sigma}, c.x, {}};
        cfg.validate();
        int n_max = 0;
        for (int n : ns) {
            if (n < 0) throw BadInput("--n values must be >= 0");
            n_max = std::max(n_max, n);
        }
        const auto chain = density_chain(cfg, n_max, std::max(n_max, kDefaultMaxPositionSteps));
        for (int n : ns) {
            const auto& d = chain[static_cast<std::size_t>(n)];
            if (n > 0) check_mass(d);
            Grid g = grid;
            if (!g.given) g = {0.0, default_grid_end(cfg, n), 0.01, true};
            Record r;
            r.command = "density";
            r.metadata["params"] = params_json(cfg);
            r.metadata["n"] = n;
            r.metadata["regime"] = std::string(to_string(dispatch_position_regime(cfg)));
            r.metadata["method"] = position_method(cfg, n);
            r.atom = d.atom;
            if (n == 0) r.metadata["atom_location"] = jnum(d.atom_location);
            r.columns = {"u", "f_n(u)"};
            double peak = 0.0;
            for (double u : grid_points(g)) {
                const double v = density_value(d, u);
                peak = std::max(peak, std::abs(v));
                r.rows.push_back({u, v});
            }
            for (const auto& row : r.rows) {
                if (row[1] < -1e-12 * std::max(1.0, peak)) {
                    throw InvariantError("negative density value " + num(row[1]) + " at u = " + num(row[0]));
                }
            }
            r.diagnostics["mass_defect"] = jnum(n == 0 ? 0.0 : std::abs(total_mass(d) - 1.0));
            out.push_back(std::move(r));
        }
    }
    return out;
}

ProcessConfig fet_config(const Common& c) {
    if (c.sigma.size() != 1) throw BadInput("--sigma takes a single value here");
    if (!c.h) throw BadInput("--h is required");
    ProcessConfig cfg{{c.mu, c.sigma.front()}, c.x, c.h};
    cfg.validate_fet();
    return cfg;
}

void check_pmf(double p, int n) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
        throw InvariantError("P(n|x) = " + num(p) + " outside [0, 1] at n = " + std::to_string(n));
    }
}

std::vector<Record> cmd_fet(const Common& c, int nmax, bool with_cdf, bool with_mean) {
    if (nmax < 1) throw BadInput("--nmax must be >= 1");
    const auto cfg = fet_config(c);
    const auto dist = fet_distribution(cfg, nmax);
    Record r;
    r.command = "fet";
    r.metadata["params"] = params_json(cfg);
    r.metadata["nmax"] = nmax;
    r.metadata["regime"] = std::string(to_string(dist.regime));
    r.metadata["method"] = fet_method(dist.regime);
    r.columns = {"n", "P(n|x)"};
    if (with_cdf) r.columns.push_back("cumulative");
    double acc = 0.0;
    for (int n = 1; n <= nmax; ++n) {
        const double p = dist.at(n)(cfg.x);
        check_pmf(p, n);
        acc += p;
        if (with_cdf) {
            r.rows.push_back({static_cast<double>(n), p, acc});
        } else {
            r.rows.push_back({static_cast<double>(n), p});
        }
    }
    if (acc > 1.0 + 1e-10) throw InvariantError("cumulative exit probability exceeds 1");
    if (with_mean) {
        const auto m = mean_fet(cfg);
        r.diagnostics["mean"] = jnum(m.mean);
        r.diagnostics["mean_tail_bound"] = jnum(m.tail_bound);
        r.diagnostics["mean_terms"] = m.terms;
        r.diagnostics["tail_ratio"] = jnum(m.tail_ratio);
    }
    return {r};
}

struct CompareOpts {
    std::string oracle;
    std::string target = "density";
    std::int64_t trajectories = 1000000;
    std::uint64_t seed = 42;
    int threads = 0;
    double delta = 1e-3;
    std::vector<int> ns;
    int nmax = 10;
    std::string grid;
};

std::vector<Record> cmd_compare(const Common& c, const CompareOpts& o, bool& pass) {
    if (o.oracle != "mc" && o.oracle != "quad") throw BadInput("unknown oracle '" + o.oracle + "' (use mc or quad)");
    if (o.target != "density" && o.target != "fet") throw BadInput("--target must be density or fet");
    if (o.trajectories < 1) throw BadInput("--trajectories must be >= 1");
    if (c.sigma.size() != 1) throw BadInput("--sigma takes a single value here");
    pass = true;
    std::vector<Record> out;

    if (o.target == "density") {
        ProcessConfig cfg{{c.mu, c.sigma.front()}, c.x, {}};
        cfg.validate();
        auto ns = o.ns.empty() ? std::vector<int>{5} : o.ns;
        int n_max = 0;
        for (int n : ns) {
            if (n < 1) throw BadInput("--n values must be >= 1 for compare");
            n_max = std::max(n_max, n);
        }
        const auto chain = density_chain(cfg, n_max, std::max(n_max, kDefaultMaxPositionSteps));
        const double U = default_grid_end(cfg, n_max);
        Grid g = parse_grid(o.grid);
        if (!g.given) g = {0.0, U, 0.25, true};

        if (o.oracle == "quad") {
            if (!(o.delta > 0.0)) throw BadInput("--delta must be > 0");
            // the grid must also hold the tail beyond the reported range
            auto grid_fn = oracle::point_mass(cfg.x, o.delta, U + 30.0 * cfg.params.sigma);
            int done = 0;
            for (int n : ns) {
                while (done < n) {
                    grid_fn = oracle::ck_convolve(grid_fn, cfg.params);
                    ++done;
                }
                const auto& d = chain[static_cast<std::size_t>(n)];
                double sup = 0.0;
                for (std::size_t i = 1; i < grid_fn.values.size(); ++i) {
                    const double u = static_cast<double>(i) * grid_fn.delta;
                    sup = std::max(sup, std::abs(grid_fn.values[i] - evaluate_mixed_density(d, u)));
                }
                const double atom_err = std::abs(grid_fn.atom - d.atom);
                const bool ok = sup < 1e-4 && atom_err < 1e-4;
                pass = pass && ok;
                Record r;
                r.command = "compare";
                r.metadata["params"] = params_json(cfg);
                r.metadata["n"] = n;
                r.metadata["target"] = "density";
                r.metadata["oracle"] = "quad";
                r.metadata["method"] = position_method(cfg, n);
                r.atom = d.atom;
                r.columns = {"u", "closed_form", "oracle", "difference"};
                for (double u : grid_points(g)) {
                    if (u == 0.0 || u > grid_fn.upper()) continue;
                    const double a = evaluate_mixed_density(d, u);
                    const double b = grid_fn.at(u);
                    r.rows.push_back({u, a, b, a - b});
                }
                r.diagnostics["delta"] = jnum(o.delta);
                r.diagnostics["sup_error"] = jnum(sup);
                r.diagnostics["atom_error"] = jnum(atom_err);
                r.diagnostics["tolerance"] = jnum(1e-4);
                r.diagnostics["verdict"] = ok ? "PASS" : "FAIL";
                out.push_back(std::move(r));
            }
        } else {
            oracle::McConfig mc;
            mc.trajectories = o.trajectories;
            mc.seed = o.seed;
            mc.n_max = n_max;
            mc.domain_hi = U;
            mc.bins = std::max(10, static_cast<int>(std::ceil(U / 0.01)));
            const auto res = oracle::simulate(cfg, mc, o.threads);
            for (int n : ns) {
                const auto& d = chain[static_cast<std::size_t>(n)];
                const auto edges = res.cdf_at_edges(n);
                double sup = 0.0;
                for (std::size_t b = 0; b < edges.size(); ++b) {
                    sup = std::max(sup, std::abs(edges[b] - cdf(d, static_cast<double>(b) * res.bin_width)));
                }
                const double se = std::sqrt(d.atom * (1.0 - d.atom) / static_cast<double>(mc.trajectories));
                const double z = se > 0.0 ? (res.atom_freq_by_n[n] - d.atom) / se : 0.0;
                const bool ok = std::abs(z) <= 4.0 && sup < 0.005;
                pass = pass && ok;
                Record r;
                r.command = "compare";
                r.metadata["params"] = params_json(cfg);
                r.metadata["n"] = n;
                r.metadata["target"] = "density";
                r.metadata["oracle"] = "mc";
                r.metadata["method"] = position_method(cfg, n);
                r.metadata["trajectories"] = o.trajectories;
                r.metadata["seed"] = o.seed;
                r.atom = d.atom;
                r.columns = {"u", "closed_form_cdf", "empirical_cdf", "difference"};
                for (double u : grid_points(g)) {
                    const auto b = static_cast<std::size_t>(std::llround(u / res.bin_width));
                    if (b >= edges.size()) continue;
                    const double ub = static_cast<double>(b) * res.bin_width;
                    const double a = cdf(d, ub);
                    r.rows.push_back({ub, a, edges[b], a - edges[b]});
                }
                r.diagnostics["atom_frequency"] = jnum(res.atom_freq_by_n[n]);
                r.diagnostics["atom_z"] = jnum(z);
                r.diagnostics["cdf_sup_distance"] = jnum(sup);
                r.diagnostics["tolerance"] = "|z| <= 4 and cdf sup < 0.005";
                r.diagnostics["verdict"] = ok ? "PASS" : "FAIL";
                out.push_back(std::move(r));
            }
        }
        return out;
    }

    const auto cfg = fet_config(c);
    if (o.nmax < 1) throw BadInput("--nmax must be >= 1");
    const auto dist = fet_distribution(cfg, o.nmax);
    Record r;
    r.command = "compare";
    r.metadata["params"] = params_json(cfg);
    r.metadata["nmax"] = o.nmax;
    r.metadata["target"] = "fet";
    r.metadata["oracle"] = o.oracle;
    r.metadata["regime"] = std::string(to_string(dist.regime));
    r.metadata["method"] = fet_method(dist.regime);
    if (o.oracle == "quad") {
        auto e = oracle::exit_base(cfg);
        double sup = 0.0;
        r.columns = {"n", "x", "closed_form", "oracle", "difference"};
        const double h = *cfg.h;
        for (int n = 1; n <= o.nmax; ++n) {
            if (n > 1) e = oracle::exit_recursion_step(e, cfg);
            for (int i = 0; i < 50; ++i) {
                const double x = h * i / 50.0;
                const double a = dist.at(n)(x);
                const double b = e.at(x);
                sup = std::max(sup, std::abs(a - b));
                r.rows.push_back({static_cast<double>(n), x, a, b, a - b});
            }
        }
        pass = sup < 1e-6;
        r.diagnostics["sup_error"] = jnum(sup);
        r.diagnostics["tolerance"] = jnum(1e-6);
    } else {
        oracle::McConfig mc;
        mc.trajectories = o.trajectories;
        mc.seed = o.seed;
        mc.n_max = 0;
        mc.fet_cap = std::max(o.nmax, 10000);
        const auto res = oracle::simulate(cfg, mc, o.threads);
        r.metadata["trajectories"] = o.trajectories;
        r.metadata["seed"] = o.seed;
        r.columns = {"n", "closed_form", "empirical", "standard_error", "z"};
        const double T = static_cast<double>(o.trajectories);
        double worst = 0.0;
        for (int n = 1; n <= o.nmax; ++n) {
            const double p = dist.at(n)(cfg.x);
            const double q = res.fet_pmf(n);
            // floor at one count so that vanishing probabilities do not give a zero band
            const double se = std::sqrt(std::max(p, 1.0 / T) * (1.0 - std::min(p, 0.5)) / T);
            const double z = (q - p) / se;
            worst = std::max(worst, std::abs(z));
            r.rows.push_back({static_cast<double>(n), p, q, se, z});
        }
        pass = worst <= 4.0;
        r.diagnostics["max_abs_z"] = jnum(worst);
        r.diagnostics["tolerance"] = "|z| <= 4 for every n";
        r.diagnostics["empirical_mean"] = jnum(res.fet_mean);
        r.diagnostics["censored"] = res.fet_censored;
    }
    r.diagnostics["verdict"] = pass ? "PASS" : "FAIL";
    out.push_back(std::move(r));
    return out;
}

std::vector<Record> cmd_cusum(double mu, double sigma, double theta, double h, double x0, int nmax, bool with_mean) {
    if (nmax < 1) throw BadInput("--nmax must be >= 1");
    cusum::CusumSpec spec{{mu, sigma}, theta, h};
    spec.validate();
    const auto llr = cusum::llr_params(spec);
    const auto pmf = cusum::run_length_distribution(spec, x0, nmax);
    const auto cfg = cusum::detector_config(spec, x0);
    Record r;
    r.command = "cusum";
    ordered_json p;
    p["mu"] = jnum(mu);
    p["sigma"] = jnum(sigma);
    p["theta"] = jnum(theta);
    p["h"] = jnum(h);
    p["x0"] = jnum(x0);
    r.metadata["params"] = p;
    r.metadata["nmax"] = nmax;
    r.metadata["llr_location"] = jnum(llr.mu);
    r.metadata["llr_scale"] = jnum(llr.sigma);
    r.metadata["log_mgf"] = jnum(cusum::log_mgf(spec));
    r.metadata["post_change_mean"] = jnum(cusum::post_change_mean(spec));
    const auto regime = dispatch_fet_regime(cfg);
    r.metadata["regime"] = std::string(to_string(regime));
    r.metadata["method"] = fet_method(regime);
    r.columns = {"n", "P(run length = n)", "cumulative"};
    double acc = 0.0;
    for (int n = 1; n <= nmax; ++n) {
        const double v = pmf[static_cast<std::size_t>(n - 1)];
        check_pmf(v, n);
        acc += v;
        r.rows.push_back({static_cast<double>(n), v, acc});
    }
    if (with_mean) r.diagnostics["average_run_length"] = jnum(cusum::average_run_length(spec, x0));
    return {r};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact laws of the Lindley process with Laplace increments", "lindley"};
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);

    Common dc;
    std::vector<int> dn;
    std::string dgrid;
    auto* density = app.add_subcommand("density", "law of W_n on a grid");
    density->set_help_flag("--help", "print help and exit");
    add_common(density, dc, false);
    density->add_option("--n", dn, "time indices (comma-separated)")->delimiter(',')->required();
    density->add_option("--grid", dgrid, "lo:hi:step");

    Common fc;
    int fnmax = 50;
    bool fcdf = false;
    bool fmean = false;
    auto* fet = app.add_subcommand("fet", "first exit time distribution");
    fet->set_help_flag("--help", "print help and exit");
    add_common(fet, fc, true);
    fet->add_option("--nmax", fnmax, "largest n");
    fet->add_flag("--cdf", fcdf, "add the cumulative column");
    fet->add_flag("--mean", fmean, "report the mean exit time");

    Common cc;
    CompareOpts co;
    auto* compare = app.add_subcommand("compare", "closed form against an oracle");
    compare->set_help_flag("--help", "print help and exit");
    add_common(compare, cc, true);
    compare->add_option("--oracle", co.oracle, "mc or quad")->required();
    compare->add_option("--target", co.target, "density or fet (default: fet when --h is given)");
    compare->add_option("--trajectories", co.trajectories, "Monte Carlo trajectories");
    compare->add_option("--seed", co.seed, "Monte Carlo seed");
    compare->add_option("--threads", co.threads, "worker threads (default LINDLEY_THREADS or all cores)");
    compare->add_option("--delta", co.delta, "quadrature grid spacing");
    compare->add_option("--n", co.ns, "time indices for density comparisons")->delimiter(',');
    compare->add_option("--nmax", co.nmax, "largest n for exit time comparisons");
    compare->add_option("--grid", co.grid, "lo:hi:step of the reported points");

    double cmu = 0.0, csigma = 1.0, ctheta = 0.5, ch = 1.0, cx0 = 0.0;
    int cnmax = 50;
    bool cmean = false;
    std::string cformat = "csv", cout_path;
    auto* cus = app.add_subcommand("cusum", "CUSUM run length through the log-likelihood-ratio map");
    cus->set_help_flag("--help", "print help and exit");
    cus->add_option("--mu", cmu, "pre-change location");
    cus->add_option("--sigma", csigma, "pre-change scale");
    cus->add_option("--theta", ctheta, "tilt");
    cus->add_option("--h", ch, "detector threshold");
    cus->add_option("--x0", cx0, "initial detector value");
    cus->add_option("--nmax", cnmax, "largest run length");
    cus->add_flag("--mean", cmean, "report the average run length");
    cus->add_option("--format", cformat, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cus->add_option("--out", cout_path, "output file (default stdout)");

    std::vector<std::string> argv_store{"lindley"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }

    std::vector<Record> records;
    std::string format;
    std::string path;
    bool pass = true;
    try {
        if (density->parsed()) {
            records = cmd_density(dc, dn, dgrid);
            format = dc.format;
            path = dc.out;
        } else if (fet->parsed()) {
            records = cmd_fet(fc, fnmax, fcdf, fmean);
            format = fc.format;
            path = fc.out;
        } else if (compare->parsed()) {
            if (compare->count("--target") == 0) co.target = cc.h ? "fet" : "density";
            records = cmd_compare(cc, co, pass);
            format = cc.format;
            path = cc.out;
        } else {
            records = cmd_cusum(cmu, csigma, ctheta, ch, cx0, cnmax, cmean);
            format = cformat;
            path = cout_path;
        }
    } catch (const BadInput& e) {
        err << "lindley: " << e.what() << '\n';
        return kBadInput;
    } catch (const DomainError& e) {
        err << "lindley: " << e.what() << '\n';
        return kBadInput;
    } catch (const RegimeError& e) {
        err << "lindley: " << e.what() << '\n';
        return kBadInput;
    } catch (const InvariantError& e) {
        err << "lindley: invariant violated: " << e.what() << '\n';
        return kInvariantBreach;
    }

    const std::string text = format == "json" ? render_json(records) : render_csv(records);
    if (path.empty()) {
        out << text;
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            err << "lindley: cannot write " << path << '\n';
            return kBadInput;
        }
        f << text;
    }
    if (!pass) {
        err << "lindley: compare verdict FAIL\n";
        return kCompareFail;
    }
    return kOk;
}

}  // namespace lindley::cli
