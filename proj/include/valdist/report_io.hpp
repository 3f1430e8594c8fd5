#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "valdist/criteria.hpp"
#include "valdist/errors.hpp"
#include "valdist/locate.hpp"
#include "valdist/nevanlinna.hpp"

namespace valdist {

// Insertion-ordered JSON keeps report bytes reproducible run to run.
using Json = nlohmann::ordered_json;

namespace io {

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json extended_json(const ExtendedComplex& v) {
    if (v.is_pole()) return Json{{"pole", v.pole_order()}};
    return complex_json(v.value());
}

inline Json root_json(const Root& r) {
    return Json{{"location", complex_json(r.location)},
                {"multiplicity", r.multiplicity},
                {"residual", r.residual}};
}

inline Json rootlist_json(const RootList& roots) {
    Json arr = Json::array();
    for (const Root& r : roots) arr.push_back(root_json(r));
    return arr;
}

inline Json nevanlinna_json(const NevanlinnaReport& rep) {
    Json j;
    j["r"] = rep.r;
    j["m"] = rep.m;
    j["N"] = rep.N;
    j["Nbar"] = rep.Nbar;
    j["T"] = rep.T;
    j["err"] = rep.err;
    j["poles"] = rootlist_json(rep.poles);
    return j;
}

inline Json audit_json(const AuditReport& rep) {
    Json j;
    j["verdict"] = verdict_name(rep.verdict);
    j["supremum"] = rep.supremum;
    if (rep.bound) j["bound"] = *rep.bound;
    Json pre = Json::array();
    for (const auto& [target, roots] : rep.preimages)
        pre.push_back(Json{{"target", complex_json(target)}, {"roots", rootlist_json(roots)}});
    j["preimages"] = pre;
    Json pts = Json::array();
    for (const AuditPoint& p : rep.points) {
        pts.push_back(Json{{"target", complex_json(p.target)},
                           {"location", complex_json(p.location)},
                           {"multiplicity", p.multiplicity},
                           {"residual", p.residual},
                           {"sharp", p.sharp}});
    }
    j["points"] = pts;
    if (rep.threshold) {
        j["threshold"] = Json{{"degree", rep.threshold->degree},
                              {"derivative_weight", rep.threshold->dweight},
                              {"k", rep.threshold->k},
                              {"rhs_num", rep.threshold->rhs.num()},
                              {"rhs_den", rep.threshold->rhs.den()},
                              {"rhs", rep.threshold->rhs.to_double()},
                              {"satisfied", rep.threshold->satisfied}};
    }
    if (rep.zeros_multiplicity_ok) j["zeros_multiplicity_ok"] = *rep.zeros_multiplicity_ok;
    return j;
}

inline Json rescale_json(const std::vector<RescaleStep>& steps) {
    Json arr = Json::array();
    for (const RescaleStep& st : steps) {
        Json samples = Json::array();
        for (const ExtendedComplex& s : st.samples) samples.push_back(extended_json(s));
        arr.push_back(Json{{"index", st.index},
                           {"witness", complex_json(st.witness)},
                           {"rho", st.rho},
                           {"alpha", st.alpha},
                           {"g_sharp_0", st.sharp0},
                           {"samples", samples}});
    }
    return Json{{"steps", arr}};
}

// ---- CSV side files -------------------------------------------------------

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : path_(path), out_(path) {
        if (!out_) throw Error("IoError", "cannot open '" + path + "' for writing");
    }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out_ << ',';
            out_ << cols[i];
        }
        out_ << '\n';
    }

    void field(double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        if (n_++) out_ << ',';
        out_ << buf;
    }
    void field(long long x) {
        if (n_++) out_ << ',';
        out_ << x;
    }
    void endrow() {
        out_ << '\n';
        n_ = 0;
    }
    void close() {
        out_.close();
        if (!out_) throw Error("IoError", "failed writing '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream out_;
    int n_ = 0;
};

inline void write_nevanlinna_csv(const std::string& path, const NevanlinnaReport& rep) {
    CsvWriter w(path);
    w.header({"r", "m", "N", "Nbar", "T", "err"});
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
        w.field(rep.r[i]);
        w.field(rep.m[i]);
        w.field(rep.N[i]);
        w.field(rep.Nbar[i]);
        w.field(rep.T[i]);
        w.field(rep.err[i]);
        w.endrow();
    }
    w.close();
}

inline void write_rootlist_csv(const std::string& path,
                               const std::vector<std::pair<Complex, RootList>>& sets) {
    CsvWriter w(path);
    w.header({"target_re", "target_im", "re", "im", "multiplicity", "residual"});
    for (const auto& [target, roots] : sets) {
        for (const Root& r : roots) {
            w.field(target.real());
            w.field(target.imag());
            w.field(r.location.real());
            w.field(r.location.imag());
            w.field(static_cast<long long>(r.multiplicity));
            w.field(r.residual);
            w.endrow();
        }
    }
    w.close();
}

inline void write_audit_csv(const std::string& path, const AuditReport& rep) {
    std::size_t width = 0;
    for (const AuditPoint& p : rep.points) width = std::max(width, p.sharp.size());
    CsvWriter w(path);
    std::vector<std::string> cols = {"target_re", "target_im", "re",
                                     "im",        "multiplicity", "residual"};
    for (std::size_t j = 0; j < width; ++j) cols.push_back("sharp_" + std::to_string(j));
    w.header(cols);
    for (const AuditPoint& p : rep.points) {
        w.field(p.target.real());
        w.field(p.target.imag());
        w.field(p.location.real());
        w.field(p.location.imag());
        w.field(static_cast<long long>(p.multiplicity));
        w.field(p.residual);
        for (double s : p.sharp) w.field(s);
        w.endrow();
    }
    w.close();
}

inline void write_rescale_csv(const std::string& path, const std::vector<RescaleStep>& steps) {
    CsvWriter w(path);
    w.header({"n", "re_z", "im_z", "rho", "g_sharp_0"});
    for (const RescaleStep& st : steps) {
        w.field(static_cast<long long>(st.index));
        w.field(st.witness.real());
        w.field(st.witness.imag());
        w.field(st.rho);
        w.field(st.sharp0);
        w.endrow();
    }
    w.close();
}

inline void write_rescale_samples_csv(const std::string& path,
                                      const std::vector<RescaleStep>& steps,
                                      const std::vector<Complex>& xi_grid) {
    CsvWriter w(path);
    w.header({"n", "re_xi", "im_xi", "re_g", "im_g"});
    const double inf = std::numeric_limits<double>::infinity();
    for (const RescaleStep& st : steps) {
        for (std::size_t s = 0; s < st.samples.size(); ++s) {
            w.field(static_cast<long long>(st.index));
            w.field(xi_grid[s].real());
            w.field(xi_grid[s].imag());
            if (st.samples[s].is_pole()) {
                w.field(inf);
                w.field(inf);
            } else {
                w.field(st.samples[s].value().real());
                w.field(st.samples[s].value().imag());
            }
            w.endrow();
        }
    }
    w.close();
}

} // namespace io
} // namespace valdist
