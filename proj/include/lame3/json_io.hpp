#ifndef LAME3_JSON_IO_HPP
#define LAME3_JSON_IO_HPP

#include <json.hpp>

#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "monodromy.hpp"
#include "roots.hpp"
#include "sympoly.hpp"

namespace lame3
{

using json = nlohmann::ordered_json;

inline json to_json(cplx z)
{
    return json::array({z.real(), z.imag()});
}

inline cplx cplx_from_json(const json &j)
{
    if (!j.is_array() || j.size() != 2) {
        throw DomainError("complex value must be a [re, im] pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

// Term list sorted by (b, g2, g3); num and den as decimal strings.
inline json to_json(const WeightedPoly &p)
{
    json out = json::array();
    for (const auto &[m, c] : p.terms()) {
        out.push_back({{"b", m.b},
                       {"g2", m.g2},
                       {"g3", m.g3},
                       {"num", c.get_num().get_str()},
                       {"den", c.get_den().get_str()}});
    }
    return out;
}

inline WeightedPoly wpoly_from_json(const json &j)
{
    if (!j.is_array()) {
        throw DomainError("polynomial must be a list of terms");
    }
    WeightedPoly p;
    bool first = true;
    for (const auto &t : j) {
        const Monomial m{t.at("b").get<int>(), t.at("g2").get<int>(), t.at("g3").get<int>()};
        if (m.b < 0 || m.g2 < 0 || m.g3 < 0) {
            throw DomainError("negative exponent in term list");
        }
        rational c(mpz_class(t.at("num").get<std::string>()), mpz_class(t.at("den").get<std::string>()));
        c.canonicalize();
        if (first) {
            p = WeightedPoly::monomial(m, c);
            first = false;
        } else {
            p.add_term(m, c);
        }
    }
    return p;
}

inline json to_json(const NumPoly &p)
{
    json c = json::array();
    for (const auto &z : p.coeffs) {
        c.push_back(to_json(z));
    }
    return {{"coeffs", c}};
}

inline NumPoly numpoly_from_json(const json &j)
{
    NumPoly p;
    for (const auto &c : j.at("coeffs")) {
        p.coeffs.push_back(cplx_from_json(c));
    }
    if (p.coeffs.empty()) {
        throw DomainError("empty coefficient list");
    }
    return p;
}

inline json to_json(const RootReport &r)
{
    json roots = json::array();
    for (const auto &z : r.roots) {
        roots.push_back(to_json(z));
    }
    return {{"roots", roots},
            {"residual", r.max_residual},
            {"gap", std::isfinite(r.min_pairwise_gap) ? json(r.min_pairwise_gap) : json(nullptr)},
            {"all_real", r.all_real}};
}

inline json to_json(const CMat &m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            r.push_back(to_json(cplx(m(i, j))));
        }
        rows.push_back(r);
    }
    return rows;
}

inline json to_json(const std::vector<cplx> &v)
{
    json out = json::array();
    for (const auto &z : v) {
        out.push_back(to_json(z));
    }
    return out;
}

inline json to_json(const MonodromyReport &r)
{
    json cls = {{"tag", class_name(r.classification)}};
    if (r.classification == MonoClass::DiagonalizablePair || r.classification == MonoClass::Unitary) {
        cls["lambda1"] = to_json(r.lambda1);
        cls["lambda2"] = to_json(r.lambda2);
    }
    return {{"n", r.n},
            {"l", r.l},
            {"B", to_json(r.B)},
            {"tau", to_json(r.tau)},
            {"N1", to_json(r.N1)},
            {"N2", to_json(r.N2)},
            {"base_point", to_json(r.base_point)},
            {"commutator_defect", r.commutator_defect},
            {"dets", json::array({to_json(r.dets[0]), to_json(r.dets[1])})},
            {"eigenvalues", json::array({to_json(r.eigen1), to_json(r.eigen2)})},
            {"classification", cls},
            {"ode_tol", r.ode_tol}};
}

} // namespace lame3

#endif
