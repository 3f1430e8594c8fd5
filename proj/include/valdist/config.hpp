#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valdist/report_io.hpp"

namespace valdist {

struct RunSettings {
    std::uint64_t seed = 0x9E3779B97F4A7C15ull;
    double tolerance = 1e-10;
    int grid_resolution = 32;
    int refine_depth = 8;
    double quad_abs_tol = 1e-9;
    double quad_rel_tol = 1e-8;
    double pair_resolution_frac = 1.0 / 64.0;
    bool analytic_pole_search = false;
    bool parallel = false;
    std::string output_dir = "out";
};

struct RunConfig {
    RunSettings settings;
    std::map<std::string, std::string> expression_sources;
    std::map<std::string, Expr> expressions;
    std::map<std::string, Family> families;
    std::map<std::string, MonomialSpec> monomials;
    std::map<std::string, DiffPolynomial> polynomials;
    Json tasks = Json::array();
};

namespace cfg {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

inline Complex get_complex(const Json& j, const std::string& where) {
    if (j.is_number()) return Complex{j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex{j[0].get<double>(), j[1].get<double>()};
    fail(where, "expected a number or [re, im] pair");
}

inline std::vector<Complex> get_complex_list(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array");
    std::vector<Complex> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_complex(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline double get_number(const Json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

inline int get_int(const Json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

inline std::string get_string(const Json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

inline const Json& need(const Json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + "." + key, "missing required key");
    return *it;
}

inline Region get_region(const Json& j, const std::string& where, const RunSettings& s) {
    if (!j.is_object()) fail(where, "expected a region object");
    const std::string shape = get_string(need(j, "shape", where), where + ".shape");
    const int res = j.contains("resolution") ? get_int(j["resolution"], where + ".resolution")
                                             : s.grid_resolution;
    const int depth = j.contains("depth") ? get_int(j["depth"], where + ".depth") : s.refine_depth;
    try {
        if (shape == "disk") {
            return Region::disk(get_complex(need(j, "center", where), where + ".center"),
                                get_number(need(j, "radius", where), where + ".radius"), res, depth);
        }
        if (shape == "rect") {
            return Region::rect(get_complex(need(j, "lo", where), where + ".lo"),
                                get_complex(need(j, "hi", where), where + ".hi"), res, depth);
        }
    } catch (const PreconditionError& e) {
        fail(where, e.what());
    }
    fail(where + ".shape", "unknown shape '" + shape + "'");
}

inline Expr parse_with_constants(const std::string& source, const Json& constants,
                                 const std::vector<std::string>& extra_params,
                                 const std::string& where) {
    std::vector<std::string> params = extra_params;
    if (!constants.is_null()) {
        if (!constants.is_object()) fail(where + ".constants", "expected an object");
        for (auto it = constants.begin(); it != constants.end(); ++it) params.push_back(it.key());
    }
    Expr e = [&] {
        try {
            return parse(source, params);
        } catch (const Error& err) {
            fail(where + ".source", err.what());
        }
    }();
    if (!constants.is_null()) {
        for (auto it = constants.begin(); it != constants.end(); ++it)
            e = e.substitute(it.key(), get_complex(it.value(), where + ".constants." + it.key()));
    }
    return e;
}

inline bool valid_name(const std::string& n) {
    if (n.empty()) return false;
    for (char c : n)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

} // namespace cfg

inline RunConfig parse_config(const Json& root) {
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    RunConfig out;

    if (root.contains("settings")) {
        const Json& s = root["settings"];
        if (!s.is_object()) cfg::fail("settings", "expected an object");
        auto& st = out.settings;
        if (s.contains("seed")) st.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("tolerance")) st.tolerance = cfg::get_number(s["tolerance"], "settings.tolerance");
        if (s.contains("grid_resolution"))
            st.grid_resolution = cfg::get_int(s["grid_resolution"], "settings.grid_resolution");
        if (s.contains("refine_depth"))
            st.refine_depth = cfg::get_int(s["refine_depth"], "settings.refine_depth");
        if (s.contains("quad_abs_tol"))
            st.quad_abs_tol = cfg::get_number(s["quad_abs_tol"], "settings.quad_abs_tol");
        if (s.contains("quad_rel_tol"))
            st.quad_rel_tol = cfg::get_number(s["quad_rel_tol"], "settings.quad_rel_tol");
        if (s.contains("pair_resolution_frac"))
            st.pair_resolution_frac =
                cfg::get_number(s["pair_resolution_frac"], "settings.pair_resolution_frac");
        if (s.contains("pole_search")) {
            const std::string m = cfg::get_string(s["pole_search"], "settings.pole_search");
            if (m == "analytic") st.analytic_pole_search = true;
            else if (m == "blind") st.analytic_pole_search = false;
            else cfg::fail("settings.pole_search", "expected 'blind' or 'analytic'");
        }
        if (s.contains("parallel")) st.parallel = s["parallel"].get<bool>();
        if (s.contains("output_dir"))
            st.output_dir = cfg::get_string(s["output_dir"], "settings.output_dir");
        if (!(st.tolerance > 0.0)) cfg::fail("settings.tolerance", "must be positive");
        if (!(st.quad_abs_tol > 0.0)) cfg::fail("settings.quad_abs_tol", "must be positive");
    }

    if (root.contains("expressions")) {
        const Json& ex = root["expressions"];
        if (!ex.is_object()) cfg::fail("expressions", "expected an object");
        for (auto it = ex.begin(); it != ex.end(); ++it) {
            const std::string where = "expressions." + it.key();
            if (!cfg::valid_name(it.key())) cfg::fail(where, "names must be [A-Za-z0-9_-]+");
            std::string source;
            Json constants;
            if (it.value().is_string()) {
                source = it.value().get<std::string>();
            } else if (it.value().is_object()) {
                source = cfg::get_string(cfg::need(it.value(), "source", where), where + ".source");
                if (it.value().contains("constants")) constants = it.value()["constants"];
            } else {
                cfg::fail(where, "expected a string or an object with 'source'");
            }
            Expr e = cfg::parse_with_constants(source, constants, {}, where);
            if (e.has_parameters()) cfg::fail(where, "expression still has free parameters");
            out.expression_sources[it.key()] = source;
            out.expressions.emplace(it.key(), std::move(e));
        }
    }

    if (root.contains("families")) {
        const Json& fs = root["families"];
        if (!fs.is_object()) cfg::fail("families", "expected an object");
        for (auto it = fs.begin(); it != fs.end(); ++it) {
            const std::string where = "families." + it.key();
            if (!cfg::valid_name(it.key())) cfg::fail(where, "names must be [A-Za-z0-9_-]+");
            if (!it.value().is_object()) cfg::fail(where, "expected an object");
            const Json& f = it.value();
            const std::string source = cfg::get_string(cfg::need(f, "source", where), where + ".source");
            const std::string param =
                cfg::get_string(cfg::need(f, "parameter", where), where + ".parameter");
            Json constants;
            if (f.contains("constants")) constants = f["constants"];
            Expr base = cfg::parse_with_constants(source, constants, {param}, where);
            auto values = cfg::get_complex_list(cfg::need(f, "values", where), where + ".values");
            try {
                out.families.emplace(it.key(), Family(std::move(base), param, std::move(values)));
            } catch (const Error& e) {
                cfg::fail(where, e.what());
            }
        }
    }

    if (root.contains("monomials")) {
        const Json& ms = root["monomials"];
        if (!ms.is_object()) cfg::fail("monomials", "expected an object");
        for (auto it = ms.begin(); it != ms.end(); ++it) {
            const std::string where = "monomials." + it.key();
            if (!it.value().is_array() || it.value().empty())
                cfg::fail(where, "expected the exponent list [n0, n1, ..., nk]");
            std::vector<int> exps;
            for (std::size_t i = 0; i < it.value().size(); ++i)
                exps.push_back(cfg::get_int(it.value()[i], where + "[" + std::to_string(i) + "]"));
            try {
                out.monomials.emplace(it.key(), MonomialSpec(exps));
            } catch (const Error& e) {
                cfg::fail(where, e.what());
            }
        }
    }

    if (root.contains("polynomials")) {
        const Json& ps = root["polynomials"];
        if (!ps.is_object()) cfg::fail("polynomials", "expected an object");
        for (auto it = ps.begin(); it != ps.end(); ++it) {
            const std::string where = "polynomials." + it.key();
            const Json& terms = cfg::need(it.value(), "terms", where);
            if (!terms.is_array() || terms.empty()) cfg::fail(where + ".terms", "expected a nonempty array");
            std::vector<DiffPolynomial::Term> parsed;
            for (std::size_t i = 0; i < terms.size(); ++i) {
                const std::string twhere = where + ".terms[" + std::to_string(i) + "]";
                const Json& t = terms[i];
                DiffPolynomial::Term term{Expr::literal(1.0), {}};
                term.coeff = cfg::parse_with_constants(
                    cfg::get_string(cfg::need(t, "coeff", twhere), twhere + ".coeff"), Json(), {},
                    twhere);
                const Json& pw = cfg::need(t, "powers", twhere);
                if (!pw.is_array() || pw.empty()) cfg::fail(twhere + ".powers", "expected an array");
                for (std::size_t p = 0; p < pw.size(); ++p)
                    term.powers.push_back(cfg::get_int(pw[p], twhere + ".powers"));
                parsed.push_back(std::move(term));
            }
            try {
                out.polynomials.emplace(it.key(), DiffPolynomial(std::move(parsed)));
            } catch (const Error& e) {
                cfg::fail(where, e.what());
            }
        }
    }

    const Json& tasks = cfg::need(root, "tasks", "config");
    if (!tasks.is_array()) cfg::fail("tasks", "expected an array");
    std::vector<std::string> seen;
    static const std::vector<std::string> kTypes = {
        "eval",        "spherical",      "marty",   "apoints", "nevanlinna",
        "lappan-audit", "monomial-audit", "cascade", "rescale", "order",
        "margins"};
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string where = "tasks[" + std::to_string(i) + "]";
        const Json& t = tasks[i];
        if (!t.is_object()) cfg::fail(where, "expected an object");
        const std::string type = cfg::get_string(cfg::need(t, "type", where), where + ".type");
        if (std::find(kTypes.begin(), kTypes.end(), type) == kTypes.end())
            cfg::fail(where + ".type", "unknown task type '" + type + "'");
        const std::string name = cfg::get_string(cfg::need(t, "name", where), where + ".name");
        if (!cfg::valid_name(name)) cfg::fail(where + ".name", "names must be [A-Za-z0-9_-]+");
        if (std::find(seen.begin(), seen.end(), name) != seen.end())
            cfg::fail(where + ".name", "duplicate task name '" + name + "'");
        seen.push_back(name);
        // reference checks
        if (t.contains("expr")) {
            const std::string ref = cfg::get_string(t["expr"], where + ".expr");
            if (!out.expressions.count(ref)) cfg::fail(where + ".expr", "undeclared name '" + ref + "'");
        }
        if (t.contains("family")) {
            const std::string ref = cfg::get_string(t["family"], where + ".family");
            if (!out.families.count(ref)) cfg::fail(where + ".family", "undeclared name '" + ref + "'");
        }
        if (t.contains("monomial")) {
            const std::string ref = cfg::get_string(t["monomial"], where + ".monomial");
            if (!out.monomials.count(ref)) cfg::fail(where + ".monomial", "undeclared name '" + ref + "'");
        }
        if (t.contains("polynomial")) {
            const std::string ref = cfg::get_string(t["polynomial"], where + ".polynomial");
            if (!out.polynomials.count(ref))
                cfg::fail(where + ".polynomial", "undeclared name '" + ref + "'");
        }
        if (t.contains("tolerance") && !(cfg::get_number(t["tolerance"], where + ".tolerance") > 0.0))
            cfg::fail(where + ".tolerance", "must be positive");
    }
    out.tasks = tasks;
    return out;
}

namespace cfg {

inline LocateOptions locate_options(const RunConfig& c, const Json& task, const std::string& where,
                                    std::optional<double> region_diam = std::nullopt) {
    LocateOptions lo;
    lo.seed = c.settings.seed;
    lo.tol = task.contains("tolerance") ? get_number(task["tolerance"], where + ".tolerance")
                                        : c.settings.tolerance;
    if (!c.settings.analytic_pole_search && region_diam)
        lo.pair_resolution = *region_diam * c.settings.pair_resolution_frac;
    return lo;
}

inline NevanlinnaOptions nevanlinna_options(const RunConfig& c) {
    NevanlinnaOptions o;
    o.quad_abs_tol = c.settings.quad_abs_tol;
    o.quad_rel_tol = c.settings.quad_rel_tol;
    o.locate.seed = c.settings.seed;
    o.locate.tol = c.settings.tolerance;
    o.pair_resolution_frac = c.settings.pair_resolution_frac;
    o.analytic = c.settings.analytic_pole_search;
    return o;
}

inline std::vector<double> get_r_grid(const Json& t, const std::string& where) {
    const Json& g = need(t, "r_grid", where);
    if (!g.is_array() || g.size() < 1) fail(where + ".r_grid", "expected a nonempty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < g.size(); ++i)
        out.push_back(get_number(g[i], where + ".r_grid[" + std::to_string(i) + "]"));
    return out;
}

} // namespace cfg

struct TaskOutcome {
    std::string name;
    Json report;
    bool failed = false;
};

/// Executes one validated task; numeric failures become a report stub.
inline TaskOutcome run_task(const RunConfig& c, const Json& t,
                            const std::filesystem::path& out_dir) {
    const std::string type = t["type"].get<std::string>();
    const std::string name = t["name"].get<std::string>();
    const std::string where = "task " + name;

    TaskOutcome outcome;
    outcome.name = name;
    Json& rep = outcome.report;
    rep["task"] = name;
    rep["type"] = type;
    Json inputs = Json::object();
    Json results = Json::object();
    Json csv = Json::array();

    auto expr_of = [&](const char* key = "expr") -> const Expr& {
        return c.expressions.at(cfg::get_string(cfg::need(t, key, where), where));
    };

    try {
        if (type == "eval" || type == "spherical") {
            const Expr& f = expr_of();
            inputs["expr"] = t["expr"];
            auto points = cfg::get_complex_list(cfg::need(t, "points", where), where + ".points");
            Json arr = Json::array();
            if (type == "eval") {
                const int k = t.contains("derivative") ? cfg::get_int(t["derivative"], where) : 0;
                inputs["derivative"] = k;
                for (Complex p : points)
                    arr.push_back(Json{{"point", io::complex_json(p)},
                                       {"value", io::extended_json(derivative_at(f, p, k))}});
            } else {
                const int j = t.contains("j") ? cfg::get_int(t["j"], where) : 0;
                inputs["j"] = j;
                for (Complex p : points)
                    arr.push_back(Json{{"point", io::complex_json(p)},
                                       {"value", spherical_derivative(f, p, j)}});
            }
            results["values"] = arr;
        } else if (type == "marty") {
            const Region region =
                cfg::get_region(cfg::need(t, "region", where), where + ".region", c.settings);
            const int j = t.contains("j") ? cfg::get_int(t["j"], where) : 0;
            inputs["j"] = j;
            if (t.contains("family")) {
                inputs["family"] = t["family"];
                const Family& fam = c.families.at(t["family"].get<std::string>());
                Json arr = Json::array();
                for (std::size_t i = 0; i < fam.size(); ++i) {
                    const auto m = marty_sup(fam.instantiate(i), region, j);
                    arr.push_back(Json{{"index", i},
                                       {"value", io::complex_json(fam.values()[i])},
                                       {"estimate", m.estimate},
                                       {"argmax", io::complex_json(m.argmax)}});
                }
                results["members"] = arr;
            } else {
                const Expr& f = expr_of();
                inputs["expr"] = t["expr"];
                const auto m = marty_sup(f, region, j);
                results["estimate"] = m.estimate;
                results["argmax"] = io::complex_json(m.argmax);
            }
        } else if (type == "apoints") {
            const Expr& f = expr_of();
            inputs["expr"] = t["expr"];
            const Region region =
                cfg::get_region(cfg::need(t, "region", where), where + ".region", c.settings);
            auto targets = cfg::get_complex_list(cfg::need(t, "targets", where), where + ".targets");
            const LocateOptions lo = cfg::locate_options(c, t, where, region.diameter());
            auto sets = preimage_set(f, targets, region, lo);
            Json arr = Json::array();
            for (const auto& [target, roots] : sets)
                arr.push_back(Json{{"target", io::complex_json(target)},
                                   {"roots", io::rootlist_json(roots)}});
            results["preimages"] = arr;
            io::write_rootlist_csv((out_dir / (name + ".csv")).string(), sets);
            csv.push_back(name + ".csv");
        } else if (type == "nevanlinna") {
            const Expr& f = expr_of();
            inputs["expr"] = t["expr"];
            auto grid = cfg::get_r_grid(t, where);
            auto report = characteristic(f, grid, cfg::nevanlinna_options(c));
            results = io::nevanlinna_json(report);
            io::write_nevanlinna_csv((out_dir / (name + ".csv")).string(), report);
            csv.push_back(name + ".csv");
        } else if (type == "lappan-audit" || type == "monomial-audit") {
            const Expr& f = expr_of();
            inputs["expr"] = t["expr"];
            AuditConfig ac;
            ac.region = cfg::get_region(cfg::need(t, "region", where), where + ".region", c.settings);
            ac.tol = t.contains("tolerance") ? cfg::get_number(t["tolerance"], where)
                                             : c.settings.tolerance;
            ac.locate = cfg::locate_options(c, t, where, ac.region.diameter());
            if (t.contains("k")) ac.k = cfg::get_int(t["k"], where + ".k");
            if (t.contains("bound")) ac.bound = cfg::get_number(t["bound"], where + ".bound");
            AuditReport audit;
            if (type == "lappan-audit") {
                ac.targets =
                    cfg::get_complex_list(cfg::need(t, "targets", where), where + ".targets");
                inputs["targets"] = t["targets"];
                inputs["k"] = ac.k;
                audit = lappan_audit(f, ac);
            } else {
                ac.target_a = cfg::get_complex(cfg::need(t, "a", where), where + ".a");
                inputs["a"] = t["a"];
                inputs["monomial"] = t["monomial"];
                const MonomialSpec& spec = c.monomials.at(t["monomial"].get<std::string>());
                audit = monomial_audit(f, spec, ac);
            }
            results = io::audit_json(audit);
            io::write_audit_csv((out_dir / (name + ".csv")).string(), audit);
            csv.push_back(name + ".csv");
        } else if (type == "cascade") {
            const double M = cfg::get_number(cfg::need(t, "bound", where), where + ".bound");
            auto targets = cfg::get_complex_list(cfg::need(t, "targets", where), where + ".targets");
            const int k = cfg::get_int(cfg::need(t, "k", where), where + ".k");
            inputs["bound"] = M;
            inputs["targets"] = t["targets"];
            inputs["k"] = k;
            results["bounds"] = bound_cascade(M, targets, k);
        } else if (type == "rescale") {
            const Family& fam = c.families.at(t["family"].get<std::string>());
            inputs["family"] = t["family"];
            const Region region =
                cfg::get_region(cfg::need(t, "region", where), where + ".region", c.settings);
            const double alpha =
                t.contains("alpha") ? cfg::get_number(t["alpha"], where + ".alpha") : 0.0;
            inputs["alpha"] = alpha;
            std::vector<Complex> xi;
            const Json& g = cfg::need(t, "xi_grid", where);
            if (g.is_array()) {
                xi = cfg::get_complex_list(g, where + ".xi_grid");
            } else if (g.is_object()) {
                const double hw = cfg::get_number(cfg::need(g, "half_width", where), where);
                const int res = cfg::get_int(cfg::need(g, "resolution", where), where);
                if (res < 2 || !(hw > 0.0)) cfg::fail(where + ".xi_grid", "bad grid parameters");
                for (double x : detail::axis_samples(0.0, hw, res))
                    for (double y : detail::axis_samples(0.0, hw, res)) xi.push_back({x, y});
            } else {
                cfg::fail(where + ".xi_grid", "expected an array of points or {half_width, resolution}");
            }
            auto steps = zalcman_rescale(fam, region, alpha, xi);
            results = io::rescale_json(steps);
            io::write_rescale_csv((out_dir / (name + ".csv")).string(), steps);
            io::write_rescale_samples_csv((out_dir / (name + "_samples.csv")).string(), steps, xi);
            csv.push_back(name + ".csv");
            csv.push_back(name + "_samples.csv");
        } else if (type == "order") {
            const Expr& f = expr_of();
            inputs["expr"] = t["expr"];
            auto grid = cfg::get_r_grid(t, where);
            results["order"] = estimate_order(f, grid, cfg::nevanlinna_options(c));
        } else if (type == "margins") {
            const Expr& f = expr_of();
            inputs["expr"] = t["expr"];
            const std::string kind = cfg::get_string(cfg::need(t, "kind", where), where + ".kind");
            inputs["kind"] = kind;
            auto grid = cfg::get_r_grid(t, where);
            const auto opts = cfg::nevanlinna_options(c);
            if (kind == "fmt") {
                const Complex a = cfg::get_complex(cfg::need(t, "a", where), where + ".a");
                inputs["a"] = t["a"];
                results["margin"] = fmt_margin(f, a, grid, opts);
            } else if (kind == "smt") {
                auto values = cfg::get_complex_list(cfg::need(t, "values", where), where + ".values");
                inputs["values"] = t["values"];
                Json arr = Json::array();
                for (double r : grid)
                    arr.push_back(Json{{"r", r}, {"margin", smt_margin(f, values, r, opts)}});
                results["margins"] = arr;
            } else if (kind == "hinchliffe") {
                const Complex a = cfg::get_complex(cfg::need(t, "a", where), where + ".a");
                const DiffPolynomial& P = c.polynomials.at(
                    cfg::get_string(cfg::need(t, "polynomial", where), where + ".polynomial"));
                inputs["a"] = t["a"];
                inputs["polynomial"] = t["polynomial"];
                Json arr = Json::array();
                for (double r : grid)
                    arr.push_back(Json{{"r", r}, {"margin", hinchliffe_margin(f, P, a, r, opts)}});
                results["margins"] = arr;
            } else {
                cfg::fail(where + ".kind", "expected 'fmt', 'smt' or 'hinchliffe'");
            }
        }
        rep["inputs"] = inputs;
        rep["results"] = results;
        rep["csv"] = csv;
    } catch (const ConfigError&) {
        throw;  // config problems abort the run with exit 2
    } catch (const Error& e) {
        rep["inputs"] = inputs;
        rep["error"] = Json{{"kind", e.kind()}, {"detail", e.what()}};
        outcome.failed = true;
    }
    return outcome;
}

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> report_files;
};

struct RunOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<bool> parallel;
    bool verbose = false;
};

/// Batch driver: validate, run every task, write one JSON report per task
/// (plus CSV side files). Analysis outcomes never change the exit status;
/// only tool failures do (2 = config, 3 = numeric).
inline RunResult run_config(const Json& root, const RunOverrides& ov = {}) {
    RunConfig c = parse_config(root);
    if (ov.seed) c.settings.seed = *ov.seed;
    if (ov.parallel) c.settings.parallel = *ov.parallel;
    const std::filesystem::path out_dir = ov.out_dir ? *ov.out_dir : c.settings.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("IoError", "cannot create output directory '" + out_dir.string() + "'");

    std::vector<TaskOutcome> outcomes(c.tasks.size());
    if (c.settings.parallel) {
        std::vector<std::future<TaskOutcome>> futs;
        futs.reserve(c.tasks.size());
        for (const Json& t : c.tasks)
            futs.push_back(std::async(std::launch::async,
                                      [&c, &t, &out_dir] { return run_task(c, t, out_dir); }));
        for (std::size_t i = 0; i < futs.size(); ++i) outcomes[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < c.tasks.size(); ++i)
            outcomes[i] = run_task(c, c.tasks[i], out_dir);
    }

    RunResult res;
    for (const TaskOutcome& o : outcomes) {
        const std::filesystem::path path = out_dir / (o.name + ".json");
        std::ofstream f(path);
        if (!f) throw Error("IoError", "cannot write '" + path.string() + "'");
        f << o.report.dump(2) << '\n';
        f.close();
        if (!f) throw Error("IoError", "failed writing '" + path.string() + "'");
        res.report_files.push_back(path.string());
        if (o.failed) res.exit_code = 3;
        if (ov.verbose)
            std::fprintf(stderr, "[valdist] %s: %s\n", o.name.c_str(), o.failed ? "FAILED" : "ok");
    }
    return res;
}

inline RunResult run_config_file(const std::string& path, const RunOverrides& ov = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json root;
    try {
        root = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return run_config(root, ov);
}

} // namespace valdist
