#include <CLI11.hpp>

#include <lame3/acceptance.hpp>
#include <lame3/json_io.hpp>
#include <lame3/lame3.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

using namespace lame3;

namespace
{

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

cplx parse_complex(const std::string &s)
{
    const auto comma = s.find(',');
    try {
        std::size_t used = 0;
        if (comma == std::string::npos) {
            const double re = std::stod(s, &used);
            if (used != s.size()) {
                throw UsageError("bad complex value '" + s + "', expected RE,IM");
            }
            return {re, 0.0};
        }
        const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
        const double re = std::stod(a, &used);
        if (used != a.size()) {
            throw UsageError("bad complex value '" + s + "', expected RE,IM");
        }
        const double im = std::stod(b, &used);
        if (used != b.size()) {
            throw UsageError("bad complex value '" + s + "', expected RE,IM");
        }
        return {re, im};
    } catch (const std::logic_error &) {
        throw UsageError("bad complex value '" + s + "', expected RE,IM");
    }
}

json read_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw UsageError(path + ": " + e.what());
    }
}

void emit(const json &j)
{
    std::cout << j.dump(2) << "\n";
}

json lattice_json(const LatticeData &lat)
{
    return {{"tau", to_json(lat.tau)},
            {"g2", to_json(lat.g2)},
            {"g3", to_json(lat.g3)},
            {"e", json::array({to_json(lat.e[0]), to_json(lat.e[1]), to_json(lat.e[2])})},
            {"eta1", to_json(lat.eta1)},
            {"eta2", to_json(lat.eta2)},
            {"discriminant", to_json(lat.discriminant())},
            {"series_terms", lat.series_terms}};
}

int cmd_invariants(const std::string &tau)
{
    emit(lattice_json(lattice_data(parse_complex(tau))));
    return 0;
}

int cmd_poly(const std::string &kind, int n, int l, bool symbolic, const std::string &tau)
{
    WeightedPoly p;
    json meta = {{"kind", kind}};
    if (kind == "P" || kind == "Ptilde" || kind == "Q") {
        const auto pp = problem_params(n, l);
        meta["n"] = n;
        meta["l"] = l;
        meta["regime"] = regime_name(pp.regime);
        if (kind == "P") {
            p = apparent_polynomial(pp);
        } else if (kind == "Ptilde") {
            p = second_elliptic_polynomial(pp);
        } else {
            const auto s = spectral_polynomial(pp);
            p = s.Q;
            meta["norm_scalar"] = s.norm_scalar.get_str();
        }
    } else if (kind == "lame") {
        // --n is the Lame index m
        meta["m"] = n;
        p = lame_spectral_polynomial(n);
    } else {
        throw UsageError("poly kind must be one of P, Ptilde, Q, lame");
    }
    meta["degree"] = p.degree_b();
    if (symbolic || tau.empty()) {
        meta["text"] = p.to_string();
        meta["terms"] = to_json(p);
    } else {
        const auto lat = lattice_data(parse_complex(tau));
        meta["tau"] = to_json(lat.tau);
        meta["poly"] = to_json(specialize(p, lat.g2, lat.g3));
    }
    emit(meta);
    return 0;
}

int cmd_roots(const std::string &file, bool certify)
{
    const json j = read_json_file(file);
    NumPoly p;
    try {
        p = numpoly_from_json(j);
    } catch (const json::exception &e) {
        throw UsageError(file + ": " + e.what());
    }
    emit(to_json(certify ? certify_real_distinct(p) : find_roots(p)));
    return 0;
}

int cmd_monodromy(int n, int l, const std::string &B, const std::string &tau, double tol)
{
    const auto lat = lattice_data(parse_complex(tau));
    emit(to_json(monodromy_pair(problem_params(n, l), parse_complex(B), lat, tol)));
    return 0;
}

int cmd_verify(const std::string &suite)
{
    const auto checks = acceptance::run_suite(suite);
    if (checks.empty()) {
        throw UsageError("unknown suite '" + suite + "'");
    }
    int failed = 0;
    std::printf("%-6s %-4s %-50s %8s  %s\n", "result", "id", "assertion", "seconds", "detail");
    for (const auto &c : checks) {
        std::printf("%-6s %-4s %-50s %8.3f  %s\n", c.passed ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), c.seconds,
                    c.detail.c_str());
        failed += c.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}

// ------------------------------------------------------------------ scan

struct Range {
    double re_min, re_max, im_min, im_max;
    int n_re, n_im;
};

Range read_range(const json &j, const char *what)
{
    Range r{};
    try {
        r = {j.at("re_min").get<double>(), j.at("re_max").get<double>(), j.at("im_min").get<double>(),
             j.at("im_max").get<double>(), j.at("n_re").get<int>(),     j.at("n_im").get<int>()};
    } catch (const json::exception &e) {
        throw UsageError(std::string(what) + ": " + e.what());
    }
    if (r.n_re < 2 || r.n_im < 2) {
        throw UsageError(std::string(what) + ": resolution must be at least 2 per axis");
    }
    return r;
}

std::vector<cplx> expand(const Range &r)
{
    std::vector<cplx> out;
    for (int j = 0; j < r.n_im; ++j) {
        for (int i = 0; i < r.n_re; ++i) {
            out.emplace_back(r.re_min + (r.re_max - r.re_min) * i / (r.n_re - 1),
                             r.im_min + (r.im_max - r.im_min) * j / (r.n_im - 1));
        }
    }
    return out;
}

struct ScanRow {
    cplx tau, B;
    std::string cls;
    cplx l1, l2;
    bool has_lambda = false;
    std::string error;
};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int cmd_scan(const std::string &config, int threads_override)
{
    const json cfg = read_json_file(config);
    int n = 0, l = 0;
    double tol = 1e-10;
    std::string format = "json", output;
    std::vector<cplx> taus;
    try {
        n = cfg.at("n").get<int>();
        l = cfg.at("l").get<int>();
        tol = cfg.value("ode_tol", 1e-10);
        format = cfg.value("format", std::string("json"));
        output = cfg.value("output", std::string());
        if (cfg.contains("tau_list")) {
            for (const auto &t : cfg.at("tau_list")) {
                taus.push_back(cplx_from_json(t));
            }
        } else if (cfg.contains("tau_grid")) {
            taus = expand(read_range(cfg.at("tau_grid"), "tau_grid"));
        }
    } catch (const json::exception &e) {
        throw UsageError(config + ": " + e.what());
    }
    if (taus.empty()) {
        throw UsageError("scan config needs a nonempty tau_list or tau_grid");
    }
    if (format != "json" && format != "csv") {
        throw UsageError("format must be json or csv");
    }
    if (!cfg.contains("B_grid")) {
        throw UsageError("scan config needs B_grid");
    }
    const auto Bs = expand(read_range(cfg.at("B_grid"), "B_grid"));
    const auto pp = problem_params(n, l);
    std::vector<LatticeData> lats;
    for (const auto &t : taus) {
        lats.push_back(lattice_data(t));
    }

    const std::size_t total = taus.size() * Bs.size();
    std::vector<ScanRow> rows(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx; (idx = next.fetch_add(1)) < total;) {
            const std::size_t ti = idx / Bs.size(), bi = idx % Bs.size();
            ScanRow &r = rows[idx];
            r.tau = taus[ti];
            r.B = Bs[bi];
            try {
                const auto rep = monodromy_pair(pp, r.B, lats[ti], tol);
                r.cls = class_name(rep.classification);
                if (rep.classification == MonoClass::DiagonalizablePair || rep.classification == MonoClass::Unitary) {
                    r.has_lambda = true;
                    r.l1 = rep.lambda1;
                    r.l2 = rep.lambda2;
                }
            } catch (const error &e) {
                r.cls = "Error";
                r.error = e.kind();
            }
        }
    };
    int nthreads = threads_override > 0 ? threads_override : cfg.value("threads", 0);
    if (nthreads <= 0) {
        nthreads = int(std::max(1u, std::thread::hardware_concurrency()));
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto &t : pool) {
        t.join();
    }

    std::ofstream file;
    if (!output.empty()) {
        file.open(output);
        if (!file) {
            throw UsageError("cannot write " + output);
        }
    }
    std::ostream &out = output.empty() ? std::cout : file;
    if (format == "csv") {
        out << "tau_re,tau_im,B_re,B_im,lambda1_re,lambda1_im,lambda2_re,lambda2_im,abs_lambda1,abs_lambda2,"
               "classification\n";
        for (const auto &r : rows) {
            out << num(r.tau.real()) << ',' << num(r.tau.imag()) << ',' << num(r.B.real()) << ',' << num(r.B.imag());
            if (r.has_lambda) {
                out << ',' << num(r.l1.real()) << ',' << num(r.l1.imag()) << ',' << num(r.l2.real()) << ','
                    << num(r.l2.imag()) << ',' << num(std::abs(r.l1)) << ',' << num(std::abs(r.l2));
            } else {
                out << ",,,,,,";
            }
            out << ',' << (r.error.empty() ? r.cls : r.cls + ":" + r.error) << '\n';
        }
    } else {
        json arr = json::array();
        for (const auto &r : rows) {
            json row = {{"tau", to_json(r.tau)}, {"B", to_json(r.B)}};
            if (r.has_lambda) {
                row["lambda1"] = to_json(r.l1);
                row["lambda2"] = to_json(r.l2);
                row["abs_lambda1"] = std::abs(r.l1);
                row["abs_lambda2"] = std::abs(r.l2);
            } else {
                row["lambda1"] = nullptr;
                row["lambda2"] = nullptr;
                row["abs_lambda1"] = nullptr;
                row["abs_lambda2"] = nullptr;
            }
            row["classification"] = r.cls;
            if (!r.error.empty()) {
                row["error"] = r.error;
            }
            arr.push_back(row);
        }
        out << json{{"n", n}, {"l", l}, {"ode_tol", tol}, {"rows", arr}}.dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Apparent singularities, spectral polynomials and monodromy of third-order Lame-type equations"};
    app.require_subcommand(1);

    std::string tau, B, kind, poly_file, suite, config;
    int n = 0, l = 0, threads = 0;
    bool symbolic = false, certify = false;
    double tol = 1e-10;

    auto *inv = app.add_subcommand("invariants", "lattice invariants g2, g3, e_k, eta_k");
    inv->add_option("--tau", tau, "RE,IM")->required();

    auto *poly = app.add_subcommand("poly", "polynomial in B: P, Ptilde, Q or lame (Lame index in --n)");
    poly->add_option("kind", kind, "P|Ptilde|Q|lame")->required()->check(CLI::IsMember({"P", "Ptilde", "Q", "lame"}));
    poly->add_option("--n", n)->required();
    poly->add_option("--l", l);
    auto *sym = poly->add_flag("--symbolic", symbolic, "exact term list (default)");
    poly->add_option("--tau", tau, "specialize at RE,IM")->excludes(sym);

    auto *roots = app.add_subcommand("roots", "roots of a numeric polynomial file {\"coeffs\": [[re, im], ...]}");
    roots->add_option("--poly-file", poly_file)->required();
    roots->add_flag("--certify-real", certify);

    auto *mono = app.add_subcommand("monodromy", "monodromy pair around the two cycles");
    mono->add_option("--n", n)->required();
    mono->add_option("--l", l)->required();
    mono->add_option("--B", B, "RE,IM")->required();
    mono->add_option("--tau", tau, "RE,IM")->required();
    mono->add_option("--tol", tol, "integrator tolerance in [1e-12, 1e-4]");

    auto *ver = app.add_subcommand("verify", "run an acceptance suite");
    ver->add_option("suite", suite)->required()->check(CLI::IsMember(acceptance::suite_names()));

    auto *scan = app.add_subcommand("scan", "grid scan over (B, tau)");
    scan->add_option("--config", config)->required();
    scan->add_option("--threads", threads, "worker count (default: config or hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*inv) {
            return cmd_invariants(tau);
        }
        if (*poly) {
            return cmd_poly(kind, n, l, symbolic, tau);
        }
        if (*roots) {
            return cmd_roots(poly_file, certify);
        }
        if (*mono) {
            return cmd_monodromy(n, l, B, tau, tol);
        }
        if (*ver) {
            return cmd_verify(suite);
        }
        if (*scan) {
            return cmd_scan(config, threads);
        }
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const RegimeError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const error &e) {
        std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
    return 2;
}
