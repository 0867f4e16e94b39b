#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gevrey/errors.hpp"
#include "gevrey/fixedpoint.hpp"
#include "gevrey/normalform.hpp"
#include "gevrey/planner.hpp"
#include "gevrey/symbol.hpp"

namespace gevrey::io {

using json = nlohmann::ordered_json;

inline const char* entry_key(int i)
{
    static const char* keys[4] = {"11", "12", "21", "22"};
    return keys[i];
}

// Sparse records {exponents: [e_t, e_x.., e_z..], value}; zero coefficients are skipped.
inline json series_to_json(const TaylorSeries& s)
{
    json arr = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == 0.0) continue;
        const int* e = s.exponents(i);
        arr.push_back({{"exponents", std::vector<int>(e, e + s.nvars())}, {"value", s[i]}});
    }
    return arr;
}

inline TaylorSeries series_from_json(const json& j, int d, Truncation tr, int nz = -1)
{
    TaylorSeries s(d, tr, nz);
    if (!j.is_array()) throw Error(ErrorCode::io, "series must be an array of coefficient records");
    for (const auto& rec : j) {
        if (!rec.contains("exponents") || !rec.contains("value"))
            throw Error(ErrorCode::io, "coefficient record needs exponents and value");
        const auto e = rec.at("exponents").get<std::vector<int>>();
        if (static_cast<int>(e.size()) != s.nvars())
            throw Error(ErrorCode::io, "coefficient record has " + std::to_string(e.size()) + " exponents, expected " +
                                           std::to_string(s.nvars()));
        if (!s.in_range(e)) throw Error(ErrorCode::truncation, "coefficient record outside the truncation box");
        s.add_to(e, rec.at("value").get<double>());
    }
    return s;
}

inline json symbol_to_json(const TaylorSymbol& m)
{
    json o = json::object();
    for (int i = 0; i < 4; ++i) o[entry_key(i)] = series_to_json(m.e[i]);
    return o;
}

inline TaylorSymbol symbol_from_json(const json& j, int d, Truncation tr, int nz = -1)
{
    TaylorSymbol m = TaylorSymbol::zero(d, tr, nz);
    if (!j.is_object()) throw Error(ErrorCode::io, "symbol must be an object keyed by 11, 12, 21, 22");
    for (auto it = j.begin(); it != j.end(); ++it) {
        int idx = -1;
        for (int i = 0; i < 4; ++i)
            if (it.key() == entry_key(i)) idx = i;
        if (idx < 0) throw Error(ErrorCode::io, "unknown symbol entry '" + it.key() + "'");
        m.e[idx] = series_from_json(it.value(), d, tr, nz);
    }
    return m;
}

inline json truncation_to_json(const Truncation& tr) { return {{"t", tr.t}, {"x", tr.x}, {"zeta", tr.z}}; }

inline json system_to_json(const QuasilinearSystem& s)
{
    json o;
    o["d"] = s.d;
    o["truncation"] = truncation_to_json(s.A.truncation());
    o["box"] = {{"t", s.box.t}, {"x", s.box.x}, {"zeta", s.box.z}};
    o["A"] = symbol_to_json(s.A);
    o["A_u"] = json::array();
    for (const auto& a : s.A_u) o["A_u"].push_back(symbol_to_json(a));
    o["F"] = symbol_to_json(s.F);
    o["F_u"] = json::array();
    for (const auto& f : s.F_u) o["F_u"].push_back(symbol_to_json(f));
    o["has_nonlinearity"] = s.has_nonlinearity;
    return o;
}

inline QuasilinearSystem system_from_json(const json& j)
{
    try {
        const int d = j.value("d", 1);
        if (d < 1) throw Error(ErrorCode::io, "d must be at least 1");
        Truncation tr;
        if (j.contains("truncation")) {
            const auto& t = j.at("truncation");
            tr.t = t.value("t", tr.t);
            tr.x = t.value("x", tr.x);
            tr.z = t.value("zeta", tr.z);
        }
        ValidityBox box;
        if (j.contains("box")) {
            const auto& b = j.at("box");
            box.t = b.value("t", box.t);
            box.x = b.value("x", box.x);
            box.z = b.value("zeta", box.z);
        }
        if (!j.contains("A")) throw Error(ErrorCode::io, "system needs a principal symbol A");
        QuasilinearSystem s = QuasilinearSystem::from_symbol(symbol_from_json(j.at("A"), d, tr), box);
        auto list = [&](const char* key, std::vector<TaylorSymbol>& out) {
            if (!j.contains(key)) return;
            const auto& arr = j.at(key);
            if (!arr.is_array() || arr.size() != QuasilinearSystem::N)
                throw Error(ErrorCode::io, std::string(key) + " must list N = 2 symbols");
            for (std::size_t i = 0; i < arr.size(); ++i) out[i] = symbol_from_json(arr[i], d, tr);
        };
        list("A_u", s.A_u);
        list("F_u", s.F_u);
        if (j.contains("F")) s.F = symbol_from_json(j.at("F"), d, tr);
        s.has_nonlinearity = j.value("has_nonlinearity", j.contains("A_u") || j.contains("F_u"));
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io, std::string("malformed system JSON: ") + e.what());
    }
}

inline json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io, path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline QuasilinearSystem load_system(const std::string& path) { return system_from_json(read_json(path)); }

inline json diagnostics_to_json(const std::vector<Diagnostic>& ds)
{
    json arr = json::array();
    for (const auto& d : ds) arr.push_back({{"name", d.name}, {"passed", d.passed}, {"value", d.value}, {"note", d.note}});
    return arr;
}

inline json classification_to_json(const TransitionClassification& c)
{
    json o;
    o["kind"] = to_string(c.kind);
    if (c.kind == TransitionKind::smooth) o["gamma0"] = c.gamma0;
    if (c.delta) o["delta"] = series_to_json(*c.delta);
    if (c.tstar) o["tstar"] = series_to_json(*c.tstar);
    if (c.e) o["e"] = series_to_json(*c.e);
    if (c.kind == TransitionKind::stiff) o["k"] = c.k ? json(*c.k) : json(nullptr);
    o["in_scope"] = c.in_scope;
    o["diagnostics"] = diagnostics_to_json(c.diagnostics);
    return o;
}

inline json normal_form_to_json(const NormalFormData& nf)
{
    json o;
    o["case"] = to_string(nf.kind);
    o["pivot"] = nf.pivot_a21 ? "a21" : "a12";
    o["gamma0"] = nf.gamma0;
    o["Q"] = symbol_to_json(nf.Q);
    o["Q_inv"] = symbol_to_json(nf.Qinv);
    o["half_trace"] = series_to_json(nf.half_trace);
    if (nf.delta2) o["delta2"] = series_to_json(*nf.delta2);
    if (nf.tstar) o["tstar"] = series_to_json(*nf.tstar);
    if (nf.e) o["e"] = series_to_json(*nf.e);
    o["residual"] = symbol_to_json(nf.residual);
    o["valid_t_degree"] = nf.valid_t_degree;
    return o;
}

inline json remainder_to_json(const RemainderDecomposition& r)
{
    json o;
    o["case"] = to_string(r.kind);
    o["leading"] = symbol_to_json(r.leading);
    o["R"] = symbol_to_json(r.R);
    o["R_t"] = symbol_to_json(r.R_t);
    o["R_x"] = json::array();
    for (const auto& m : r.R_x) o["R_x"].push_back(symbol_to_json(m));
    o["R_zeta"] = json::array();
    for (const auto& m : r.R_z) o["R_zeta"].push_back(symbol_to_json(m));
    if (r.R_e) o["R_e"] = symbol_to_json(*r.R_e);
    o["valid_t_degree"] = r.valid_t_degree;
    return o;
}

inline json exponent_to_json(const ExponentExpr& e)
{
    return {{"eps_power", to_string(e.a)}, {"log_power", e.log_power}, {"exp_M_sign", e.m_sign}};
}

inline json plan_to_json(const ParamPlan& p)
{
    json o;
    o["case"] = to_string(p.kind);
    o["delta"] = to_string(p.delta);
    if (p.kind == PlanCase::airy) o["k"] = p.k;
    o["what_if"] = to_string(p.what_if);
    o["feasible"] = p.feasible;
    o["binding"] = p.binding;
    o["beta"] = exponent_to_json(p.beta);
    o["M_prime"] = exponent_to_json(p.M_prime);
    o["s1"] = exponent_to_json(p.s1);
    if (p.feasible) {
        o["R_inv"] = exponent_to_json(p.R_inv);
        o["rho_inv"] = exponent_to_json(p.rho_inv);
        o["s_final"] = exponent_to_json(p.s_final);
        o["domain"] = p.domain;
    }
    if (p.branch_threshold) o["branch_threshold"] = to_string(*p.branch_threshold);
    if (p.tstar_branch_limit) o["tstar_branch_limit"] = to_string(*p.tstar_branch_limit);
    json chain = json::array();
    for (const auto& c : p.chain) {
        json row{{"name", c.name},
                 {"constant", to_string(c.c0)},
                 {"delta", to_string(c.cd)},
                 {"r", to_string(c.cr)},
                 {"p", to_string(c.cp)},
                 {"origin", c.origin}};
        for (const auto& [name, v] : p.slack)
            if (name == c.name) row["slack"] = to_string(v);
        chain.push_back(row);
    }
    o["constraints"] = chain;
    return o;
}

inline json solve_report_to_json(const SolveReport& r)
{
    json o;
    o["converged"] = r.converged;
    o["iterations"] = r.iterations;
    o["distances"] = r.distances;
    o["contraction_measured"] = r.contraction_measured;
    o["contraction_constant"] = r.K;
    o["propagator_constant"] = r.C_U;
    o["norm_R"] = r.norm_R;
    o["norm_f"] = r.norm_f;
    o["norm_u_minus_f"] = r.norm_u_minus_f;
    o["solution_constant"] = r.solution_constant;
    o["residual"] = r.residual;
    o["s_end"] = r.s_end;
    o["growth"] = {{"lower_factor", r.growth.lower_factor},
                   {"max_deviation", r.growth.max_deviation},
                   {"smallness_ratio", r.growth.smallness_ratio},
                   {"lower_bound_ok", r.growth.lower_bound_ok},
                   {"cube_inside", r.growth.cube_inside}};
    return o;
}

inline json field_to_json(const TrigTaylorField& u, double tol = 0)
{
    json arr = json::array();
    for (int c = 0; c < u.ncomp(); ++c)
        for (int n = -u.nmax(); n <= u.nmax(); ++n)
            for (int k = 0; k <= u.K(); ++k)
                for (std::size_t i = 0; i < u.ns(); ++i) {
                    const cplx v = u.at(c, n, k, i);
                    if (std::abs(v) <= tol) continue;
                    arr.push_back({{"c", c}, {"n", n}, {"k", k}, {"s_index", i}, {"re", v.real()}, {"im", v.imag()}});
                }
    return arr;
}

inline std::string format_double(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

// RFC 4180: CRLF records, fields quoted when they hold a comma, quote or line break.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : ncol_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells)
    {
        if (cells.size() != ncol_) throw Error(ErrorCode::argument, "CSV row width differs from header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote(cells[i]);
        }
        out_ << "\r\n";
    }

    void row(const std::vector<double>& values)
    {
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(format_double(v));
        row(cells);
    }

    std::string str() const { return out_.str(); }
    void save(const std::string& path) const { write_text(path, str()); }

private:
    static std::string quote(const std::string& s)
    {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + '"';
    }

    std::size_t ncol_;
    std::ostringstream out_;
};

inline std::string field_to_csv(const TrigTaylorField& u)
{
    CsvWriter w({"c", "n", "k", "s_index", "s", "re", "im"});
    for (int c = 0; c < u.ncomp(); ++c)
        for (int n = -u.nmax(); n <= u.nmax(); ++n)
            for (int k = 0; k <= u.K(); ++k)
                for (std::size_t i = 0; i < u.ns(); ++i) {
                    const cplx v = u.at(c, n, k, i);
                    if (v == cplx(0)) continue;
                    w.row({std::to_string(c), std::to_string(n), std::to_string(k), std::to_string(i),
                           format_double(u.s(i)), format_double(v.real()), format_double(v.imag())});
                }
    return w.str();
}

} // namespace gevrey::io
