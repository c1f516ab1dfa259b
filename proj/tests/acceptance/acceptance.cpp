// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qpsn/cli.hpp"
#include "qpsn/entdist.hpp"
#include "qpsn/frame_codec.hpp"
#include "qpsn/qkd_model.hpp"
#include "qpsn/quantum_state.hpp"
#include "qpsn/switching.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = true;
    std::vector<std::string> notes;

    void check(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            notes.push_back("failed: " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<void(Outcome&)>& body)
{
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        o.check(false, fmt("runtime %.2f s exceeds %.0f s", secs, budget_s));
    }
    std::printf("[%s] %s %s (%.2f s)\n", o.ok ? "PASS" : "FAIL", id, title, secs);
    for (const auto& n : o.notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
    if (!o.ok) ++failures;
}

// ---------------------------------------------------------------------------

void ac1(Outcome& o)
{
    using namespace qpsn::qkd;
    o.check(std::abs(k_factor(0.5, 2, 100) - 0.245) <= 1e-12, "k_factor(0.5, 2, 100) = 0.245");
    o.check(std::abs(k_factor(0.5, 3, 100) - 0.12125) <= 1e-12, "k_factor(0.5, 3, 100) = 0.12125");
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uP(0.05, 1.0);
    std::uniform_int_distribution<int> un(0, 6);
    const std::int64_t trials = 100000;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double P = uP(rng);
        const int n = un(rng);
        const double exact = k_factor(P, n, 100);
        const double mc = monte_carlo_k(P, n, 100, trials, 1000 + static_cast<std::uint64_t>(i));
        const double p = std::pow(P, n);
        const double sigma = (100.0 - n) / 100.0 * std::sqrt(p * (1 - p) / static_cast<double>(trials));
        const double z = sigma > 0 ? std::abs(mc - exact) / sigma : (mc == exact ? 0.0 : INFINITY);
        worst = std::max(worst, z);
        o.check(z <= 4.0, fmt("MC point P=%.3f n=%.0f off by %.2f sigma", P, n, z));
    }
    o.note(fmt("20 Monte-Carlo points, worst deviation %.2f sigma", worst));
}

void ac2(Outcome& o)
{
    using namespace qpsn::qkd;
    QkdParams base;  // 0.2 dB/km, eta 0.5, p_dark 1e-6, f 1.15
    std::vector<double> grid;
    for (int L = 0; L <= 200; L += 10) grid.push_back(L);
    const std::vector<int> ns{0, 1, 2, 3};
    const auto rows = qkd_sweep(grid, ns, base);
    auto R = [&](std::size_t n, std::size_t l) { return rows[n * grid.size() + l].R; };
    for (std::size_t n = 0; n < ns.size(); ++n) {
        o.check(R(n, 0) > 0.0, fmt("R > 0 at L = 0 for n = %.0f", static_cast<double>(n)));
        for (std::size_t l = 1; l < grid.size(); ++l)
            o.check(R(n, l) <= R(n, l - 1), fmt("R non-increasing in L (n=%.0f, L=%.0f)", double(n), grid[l]));
        if (n > 0)
            for (std::size_t l = 0; l < grid.size(); ++l)
                o.check(R(n, l) <= R(n - 1, l), fmt("R non-increasing in n (n=%.0f, L=%.0f)", double(n), grid[l]));
    }
    for (std::size_t l = 0; l < grid.size(); ++l) {
        QkdParams circuit = base;
        circuit.length_km = grid[l];
        circuit.n = 0;
        circuit.P = 1.0;
        const auto c = secret_key_rate(circuit);
        o.check(rows[l].K == 1.0 && rows[l].R == c.R, fmt("n = 0 equals the K = 1 baseline at L=%.0f", grid[l]));
    }
    o.note(fmt("R(L=0): n=0 %.6f, n=3 %.6f", R(0, 0), R(3, 0)));
}

void ac3(Outcome& o)
{
    using namespace qpsn::qstate;
    const auto epr = make_epr();
    for (double p : {0.1, 0.5, 0.9})
        for (int q : {0, 1})
            o.check(std::abs(fidelity(apply_depolarizing(epr, q, p)) - (1 - 0.75 * p)) <= 1e-10,
                    fmt("Werner fidelity at p=%.1f qubit %.0f", p, q));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0, 1);
    double worst_t = 0, worst_p = 0;
    for (int k = 0; k < 1000; ++k) {
        Eigen::MatrixXcd a(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) a(i, j) = Complex(g(rng), g(rng));
        Eigen::MatrixXcd m = a * a.adjoint();
        m /= m.trace().real();
        m = (0.5 * (m + m.adjoint())).eval();
        const auto rho = DensityMatrix::from_matrix(Matrix(m));
        const int q = k % 2;
        const double T1 = 1e4 + 1e6 * u(rng), T2 = 2 * T1 * u(rng) + 1, t1 = 1e6 * u(rng), t2 = 1e6 * u(rng);
        const auto split = apply_t1t2(apply_t1t2(rho, q, t1, T1, T2), q, t2, T1, T2);
        worst_t = std::max(worst_t, (split.matrix() - apply_t1t2(rho, q, t1 + t2, T1, T2).matrix()).cwiseAbs().maxCoeff());
        const double p1 = u(rng), p2 = u(rng);
        const auto twice = apply_depolarizing(apply_depolarizing(rho, q, p1), q, p2);
        const auto once = apply_depolarizing(rho, q, 1 - (1 - p1) * (1 - p2));
        worst_p = std::max(worst_p, (twice.matrix() - once.matrix()).cwiseAbs().maxCoeff());
    }
    o.check(worst_t <= 1e-10, fmt("t1t2 time composition, worst %.2e", worst_t));
    o.check(worst_p <= 1e-10, fmt("depolarizing composition, worst %.2e", worst_p));
    o.note(fmt("1000 random cases: time composition %.1e, probability composition %.1e", worst_t, worst_p));
}

void ac4(Outcome& o)
{
    using namespace qpsn::ent;
    const EntParams defaults;  // T1 = T2 = 0.5 ms, proc 125 us, period 5 us, 10 qubits, p_L 0.008
    std::vector<double> lengths;
    for (int L = 0; L <= 550; L += 10) lengths.push_back(L);

    auto line = [&](bool ok, const std::string& s) {
        o.note(std::string(ok ? "[pass] " : "[FAIL] ") + s);
        if (!ok) o.ok = false;
    };

    // Hop trend over the full length grid.
    {
        const std::vector<int> hops{0, 1, 2, 3};
        const auto means = summarize(sweep_length_hops(defaults, lengths, hops, ScenarioKind::Central));
        int bad = 0;
        double first_bad = -1;
        for (std::size_t l = 0; l < lengths.size(); ++l) {
            for (std::size_t h = 1; h < hops.size(); ++h) {
                if (!(means[h * lengths.size() + l].mean_fidelity < means[(h - 1) * lengths.size() + l].mean_fidelity)) {
                    ++bad;
                    if (first_bad < 0) first_bad = lengths[l];
                }
            }
        }
        line(bad == 0, bad == 0 ? "fidelity strictly decreases with hop count at every length 0-550 km"
                                : fmt("hop trend violated at %.0f of %.0f (length, hop) pairs, first at %.0f km", bad,
                                      static_cast<double>(lengths.size() * 3), first_bad));
    }

    // Memory lifetime at 60 km with 3 relays per arm.
    {
        std::vector<double> ts;
        for (int e = 8; e <= 18; ++e) ts.push_back(std::pow(10.0, e / 2.0));
        const double at60[] = {60.0};
        const auto means = summarize(sweep_t1t2_length(defaults, ts, at60, 3));
        bool monotone = true;
        double worst_drop = 0;
        for (std::size_t i = 1; i < means.size(); ++i) {
            const double d = means[i - 1].mean_fidelity - means[i].mean_fidelity;
            if (d > 0) {
                monotone = false;
                worst_drop = std::max(worst_drop, d);
            }
        }
        line(monotone, monotone ? "fidelity non-decreasing in T1 = T2 at 60 km / 3 hops"
                                : fmt("fidelity drops by up to %.4f as T1 = T2 grows at 60 km / 3 hops", worst_drop));
        const double f5 = means[2].mean_fidelity;  // 1e5 ns
        const double f7 = means[6].mean_fidelity;  // 1e7 ns
        line(f7 - f5 > 0.2, fmt("rise from T = 1e5 to 1e7 ns at 60 km / 3 hops: %.4f -> %.4f (%.4f, needs > 0.2)", f5,
                                f7, f7 - f5));
    }

    // Processing time with fiber noise off.
    {
        const std::vector<qpsn::sim::Nanos> procs{0, 10000, 25000, 50000, 75000, 100000, 125000, 150000, 200000};
        const std::vector<double> ts{5e5, 1e6, 5e6, 1e7};
        const auto means = summarize(sweep_proc_t1(defaults, procs, ts, 3, 20.0));
        bool flat = true, falling = true;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            for (std::size_t i = 1; i < procs.size(); ++i) {
                const double prev = means[(i - 1) * ts.size() + j].mean_fidelity;
                const double cur = means[i * ts.size() + j].mean_fidelity;
                if (procs[i] <= 50000) flat = flat && cur == prev;
                else falling = falling && cur < prev;
            }
        }
        line(flat && falling, fmt("p_L = 0: flat for processing time <= 50 us, decreasing above (%.0f T values)",
                                  static_cast<double>(ts.size())));
    }

    // Source placement.
    for (int hops : {0, 1, 2}) {
        const auto cmp = compare_scenarios(defaults, lengths, hops);
        const bool both = cmp.central_crossing && cmp.sender_crossing;
        const bool ok = both && *cmp.sender_crossing < *cmp.central_crossing;
        line(ok, both ? fmt("hops=%.0f: 0.5 crossing sender %.2f km < central %.2f km", hops, *cmp.sender_crossing,
                            *cmp.central_crossing) +
                            fmt(" (ratio %.3f)", *cmp.sender_crossing / *cmp.central_crossing)
                      : fmt("hops=%.0f: a scenario never crosses 0.5", hops));
    }
}

void ac5(Outcome& o)
{
    using namespace qpsn::frame;
    FrameHeader h;
    h.dest_addr = parse_mac("01:80:c2:00:00:0e");
    h.src_addr = parse_mac("02:00:00:00:00:01");
    h.qdu = {10, 1, 5000, 0};
    h.guard_time = 500000;
    h.max_cutoff_time = 1000000;
    h.ttl = 120;
    const std::string golden =
        "0180c200000e020000000001" "88cc" "0207040200000000" "01" "0407030200000000" "01" "06020078"
        "fe050000000100" "fe0c00000002000a0100001388" "00" "fe0c000000030000000000000000"
        "fe0c00000004" "00000000000f4240" "fe050000000500" "fe0800000006" "0007a120" "0000";
    o.check(to_hex(encode(h)) == golden, "golden header frame byte layout");
    o.check(decode(from_hex(golden)).header == h, "golden header frame decodes");

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::uint64_t> any;
    int lossy = 0;
    for (int k = 0; k < 10000; ++k) {
        FrameHeader r;
        for (auto& b : r.dest_addr) b = static_cast<std::uint8_t>(any(rng));
        for (auto& b : r.src_addr) b = static_cast<std::uint8_t>(any(rng));
        if (k % 5 == 0) {
            r = make_trailer(r);
        } else {
            r.qdu = {static_cast<std::uint32_t>(1 + any(rng) % 0xFFFF), static_cast<std::uint8_t>(any(rng)),
                     1 + any(rng) % 0xFFFFFFFFull, static_cast<std::uint8_t>(any(rng))};
            r.guard_time = any(rng) & 0xFFFFFFFF;
            r.elapsed_memory_time = any(rng);
            r.max_cutoff_time = any(rng);
            r.qec_protocol = static_cast<std::uint8_t>(any(rng));
            r.ttl = static_cast<std::uint32_t>(any(rng) & 0xFFFF);
        }
        const auto bytes = encode(r);
        if (!(decode(bytes).header == r) || encode(decode(bytes).header) != bytes) ++lossy;
    }
    o.check(lossy == 0, fmt("%.0f of 10000 round trips lossy", lossy));

    const auto good = encode(h);
    int structured = 0, accepted = 0, other = 0;
    std::uniform_int_distribution<int> byte(0, 255);
    for (int k = 0; k < 100000; ++k) {
        Octets b;
        if (k % 2) {
            b.resize(static_cast<std::size_t>(byte(rng) % 160));
            for (auto& x : b) x = static_cast<std::uint8_t>(byte(rng));
        } else {
            b = good;
            for (int f = 0; f < 1 + k % 4; ++f) b[static_cast<std::size_t>(byte(rng)) % b.size()] = static_cast<std::uint8_t>(byte(rng));
            if (k % 3 == 0) b.resize(static_cast<std::size_t>(byte(rng)) % b.size());
        }
        try {
            decode(b);
            ++accepted;
        } catch (const DecodeError&) {
            ++structured;
        } catch (...) {
            ++other;
        }
    }
    o.check(other == 0, fmt("%.0f fuzz cases raised unstructured errors", other));
    o.note(fmt("fuzz: %.0f structured errors, %.0f accepted, %.0f other", structured, accepted, other));
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void ac6(Outcome& o)
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qpsn_acceptance_determinism";
    fs::create_directories(dir);
    const std::vector<std::vector<std::string>> commands = {
        {"qkd-sweep"},
        {"mc-k", "--availability", "0.5", "--switches", "3", "--trials", "100000", "--seed", "9"},
        {"frame", "encode", "--guard", "500000"},
        {"frame", "decode", "0180c200000e02000000000188ccfe0500000001010000"},
        {"entdist", "--sweep", "single", "--total-length", "60", "--hops", "3"},
        {"entdist", "--sweep", "length-hops", "--lengths", "0:100:10"},
        {"entdist", "--sweep", "t1t2-length", "--lengths", "0:100:20"},
        {"entdist", "--sweep", "proc-t1"},
        {"entdist", "--sweep", "compare", "--lengths", "0:200:10", "--scenario", "sender"},
    };
    int i = 0;
    for (const auto& cmd : commands) {
        std::string label;
        for (const auto& a : cmd) label += (label.empty() ? "" : " ") + a;
        std::string outputs[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path file = dir / ("run" + std::to_string(i) + "_" + std::to_string(rep) + ".txt");
            auto args = cmd;
            const bool sweep = cmd[0] != "frame" && cmd[0] != "mc-k";
            if (sweep) {
                args.push_back("--out");
                args.push_back(file.string());
            }
            std::ostringstream out, err;
            const int code = qpsn::cli::run(args, out, err);
            o.check(code == 0, "exit code 0 for " + cmd[0]);
            outputs[rep] = (sweep ? slurp(file) : std::string()) + out.str() + err.str();
        }
        o.check(!outputs[0].empty() && outputs[0] == outputs[1], "byte-identical repeat of '" + label + "'");
        ++i;
    }
    fs::remove_all(dir);
    o.note(fmt("%.0f commands run twice", static_cast<double>(commands.size())));
}

void ac7(Outcome& o)
{
    using namespace qpsn::sim;
    const auto chain = Topology::linear_chain(4, 40.0, 0.0);
    const auto run = simulate_burst(chain, SwitchPolicy{BurstPolicy{500000, 2.0}, 1.0}, 125000, 1, 2);
    o.check(run.attempts.size() == 2, "one drop followed by one retransmission");
    if (run.attempts.size() != 2) return;
    const auto& a = run.attempts[0];
    const auto& b = run.attempts[1];
    o.check(!a.delivered && a.reason == DropReason::GuardExhausted, "first attempt dropped for guard exhaustion");
    o.check(a.relays_visited == 4 && a.drop_relay == 4, "first attempt reaches exactly 4 relays, dropped at the 4th");
    o.check(b.guard == 1000000, "retransmission doubles the guard");
    o.check(b.delivered && b.relays_visited == 4 && b.hops_forwarded == 4, "retransmission delivered over 4 relays");
    o.note(fmt("attempt 0: guard %.0f ns, relays %.0f, dropped at relay %.0f", static_cast<double>(a.guard),
               a.relays_visited, a.drop_relay));
    o.note(fmt("attempt 1: guard %.0f ns, relays %.0f, delivered %.0f", static_cast<double>(b.guard), b.relays_visited,
               b.delivered));
}

}  // namespace

int main()
{
    criterion("AC1", "routing factor exact and Monte-Carlo agreement", 5, ac1);
    criterion("AC2", "key rate positivity, monotonicity and circuit baseline", 5, ac2);
    criterion("AC3", "channel identities", 10, ac3);
    criterion("AC4", "entanglement-distribution trends", 60, ac4);
    criterion("AC5", "frame codec round trips, fuzz and golden frame", 30, ac5);
    criterion("AC6", "determinism of CLI outputs", 0, ac6);
    criterion("AC7", "burst switching guard budget", 1, ac7);
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
