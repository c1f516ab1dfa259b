#include "qpsn/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "qpsn/frame_codec.hpp"
#include "qpsn/run_config.hpp"

namespace qpsn::cli {

namespace {

struct FrameArgs {
    std::string dest = "01:80:c2:00:00:0e";
    std::string src = "02:00:00:00:00:01";
    std::string role = "header";
    std::uint32_t payload_len = 10;
    unsigned encoding = 1;
    std::uint64_t emission_period = 5000;
    unsigned multiplexing = 0;
    std::uint64_t guard = 0;
    std::uint64_t elapsed = 0;
    std::uint64_t cutoff = 0;
    unsigned qec = 0;
    std::uint32_t ttl = 120;
    std::string hex;
};

std::uint8_t narrow_id(unsigned v, const char* what)
{
    if (v > 0xFF) {
        throw frame::EncodeError(std::string(what) + " overflows its 8-bit wire field");
    }
    return static_cast<std::uint8_t>(v);
}

int frame_encode(const FrameArgs& a, std::ostream& out)
{
    frame::FrameHeader h;
    h.dest_addr = frame::parse_mac(a.dest);
    h.src_addr = frame::parse_mac(a.src);
    if (a.role == "trailer") {
        out << frame::to_hex(frame::encode(frame::make_trailer(h))) << '\n';
        return kExitOk;
    }
    h.qdu.payload_len = a.payload_len;
    h.qdu.encoding_scheme = narrow_id(a.encoding, "encoding");
    h.qdu.emission_period = a.emission_period;
    h.qdu.multiplexing = narrow_id(a.multiplexing, "multiplexing");
    h.guard_time = a.guard;
    h.elapsed_memory_time = a.elapsed;
    h.max_cutoff_time = a.cutoff;
    h.qec_protocol = narrow_id(a.qec, "qec");
    h.ttl = a.ttl;
    out << frame::to_hex(frame::encode(h)) << '\n';
    return kExitOk;
}

int frame_decode(const FrameArgs& a, std::ostream& out)
{
    const frame::Octets bytes = frame::from_hex(a.hex);
    const auto decoded = frame::decode(bytes);
    const auto& h = decoded.header;
    out << "dest=" << frame::format_mac(h.dest_addr) << '\n'
        << "src=" << frame::format_mac(h.src_addr) << '\n'
        << "role=" << (h.role == frame::Role::Header ? "header" : "trailer") << '\n';
    if (h.role == frame::Role::Header) {
        out << "payload_len=" << h.qdu.payload_len << '\n'
            << "encoding=" << unsigned(h.qdu.encoding_scheme) << '\n'
            << "emission_period=" << h.qdu.emission_period << '\n'
            << "multiplexing=" << unsigned(h.qdu.multiplexing) << '\n'
            << "guard=" << h.guard_time << '\n'
            << "elapsed=" << h.elapsed_memory_time << '\n'
            << "cutoff=" << h.max_cutoff_time << '\n'
            << "qec=" << unsigned(h.qec_protocol) << '\n'
            << "ttl=" << h.ttl << '\n'
            << "live=" << (frame::is_live(h) ? 1 : 0) << '\n';
    }
    for (const auto& tlv : decoded.unknown) {
        out << "unknown_tlv=" << tlv.offset << ':' << unsigned(tlv.type) << ':' << frame::to_hex(tlv.value) << '\n';
    }
    return kExitOk;
}

// Sweeps go to --out when given, otherwise to stdout.
template <typename Writer>
void emit(const RunConfig& cfg, std::ostream& out, Writer&& write)
{
    if (cfg.out.empty()) {
        write(out);
        return;
    }
    std::ofstream file(cfg.out, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open output file '" + cfg.out + "'");
    }
    write(file);
    if (!file) {
        throw std::runtime_error("failed writing '" + cfg.out + "'");
    }
}

int qkd_sweep_cmd(const RunConfig& cfg, std::ostream& out)
{
    const auto rows = qkd::qkd_sweep(cfg.qkd_lengths, cfg.n_list, cfg.qkd);
    emit(cfg, out, [&](std::ostream& os) { write_qkd_csv(os, rows); });
    return kExitOk;
}

int mc_k_cmd(const RunConfig& cfg, std::ostream& out)
{
    const auto& q = cfg.qkd;
    const double estimate = qkd::monte_carlo_k(q.P, q.n, q.tq_over_tp, cfg.trials, cfg.seed);
    const double exact = qkd::k_factor(q.P, q.n, q.tq_over_tp);
    out << "P,n,tq_over_tp,trials,seed,K_mc,K\n"
        << format_number(q.P) << ',' << q.n << ',' << format_number(q.tq_over_tp) << ',' << cfg.trials << ','
        << cfg.seed << ',' << format_number(estimate) << ',' << format_number(exact) << '\n';
    return kExitOk;
}

int entdist_cmd(const RunConfig& cfg, const std::string& sweep, const std::string& scenario, const std::string& noise,
                std::ostream& out, std::ostream& err)
{
    const ent::ScenarioKind kind = scenario == "sender" ? ent::ScenarioKind::Sender : ent::ScenarioKind::Central;
    ent::EntParams params = cfg.ent;
    if (noise == "off") {
        params = ent::noiseless(params);
    }

    std::vector<ent::FidelityRow> rows;
    std::string summary;
    if (sweep == "single") {
        const int hops[] = {cfg.hops};
        const double length[] = {params.total_length_km};
        rows = ent::sweep_length_hops(params, length, hops, kind);
    } else if (sweep == "length-hops") {
        rows = ent::sweep_length_hops(params, cfg.lengths, cfg.hops_list, kind);
    } else if (sweep == "t1t2-length") {
        if (noise == "off") {
            throw ConfigError("the T1/T2 sweep sets T1 and T2 itself; --noise off does not apply");
        }
        rows = ent::sweep_t1t2_length(params, cfg.t_grid, cfg.lengths, cfg.hops);
    } else if (sweep == "proc-t1") {
        rows = ent::sweep_proc_t1(params, cfg.proc_grid, cfg.t_grid, cfg.hops, cfg.hop_km);
    } else {
        auto cmp = ent::compare_scenarios(params, cfg.lengths, cfg.compare_hops);
        rows = std::move(cmp.rows);
        auto fmt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("none"); };
        summary = "crossing_central_km=" + fmt(cmp.central_crossing) + "\ncrossing_sender_km=" + fmt(cmp.sender_crossing) + "\n";
    }
    emit(cfg, out, [&](std::ostream& os) { write_fidelity_csv(os, rows); });
    if (!summary.empty()) {
        (cfg.out.empty() ? err : out) << summary;
    }
    return kExitOk;
}

}  // namespace

std::string format_number(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_qkd_csv(std::ostream& os, std::span<const qkd::SweepRow> rows)
{
    os << "L_km,n,Q,e,K,R\n";
    for (const auto& r : rows) {
        os << format_number(r.length_km) << ',' << r.n << ',' << format_number(r.Q) << ',' << format_number(r.e) << ','
           << format_number(r.K) << ',' << format_number(r.R) << '\n';
    }
}

void write_fidelity_csv(std::ostream& os, std::span<const ent::FidelityRow> rows)
{
    os << "scenario,total_length_km,hops,T1_ns,T2_ns,proc_ns,pair_index,fidelity\n";
    for (const auto& r : rows) {
        os << ent::to_string(r.scenario) << ',' << format_number(r.total_length_km) << ',' << r.hops << ','
           << format_number(r.T1_ns) << ',' << format_number(r.T2_ns) << ',' << r.proc_ns << ',' << r.pair_index << ','
           << format_number(r.fidelity) << '\n';
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Packet-switched quantum network link-layer simulator", "qpsn"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);

    std::map<std::string, std::string> overrides;
    std::map<std::string, CLI::Option*> override_opts;
    for (const auto& k : config_keys()) {
        override_opts[k.key] = app.add_option(flag_for(k.key), overrides[k.key], k.help)->group("Parameters");
    }

    FrameArgs fa;
    auto* frame_cmd = app.add_subcommand("frame", "encode or decode a frame header/trailer (hex)");
    frame_cmd->require_subcommand(1);
    auto* enc = frame_cmd->add_subcommand("encode", "print the encoded frame as hex");
    enc->add_option("--dest", fa.dest, "destination link address");
    enc->add_option("--src", fa.src, "source link address");
    enc->add_option("--role", fa.role, "header or trailer")->check(CLI::IsMember({"header", "trailer"}));
    enc->add_option("--payload-len", fa.payload_len, "quantum data units in the payload");
    enc->add_option("--encoding", fa.encoding, "0 = BB84 polarization, 1 = EPR half");
    enc->add_option("--emission-period", fa.emission_period, "ns between QDUs");
    enc->add_option("--mux", fa.multiplexing, "0 = TDM, 1 = WDM");
    enc->add_option("--guard", fa.guard, "guard time, ns");
    enc->add_option("--elapsed", fa.elapsed, "elapsed memory time, ns");
    enc->add_option("--cutoff", fa.cutoff, "max cut-off time, ns (0 = none)");
    enc->add_option("--qec", fa.qec, "QEC protocol id");
    enc->add_option("--ttl", fa.ttl, "LLDP TTL, seconds");
    auto* dec = frame_cmd->add_subcommand("decode", "parse a hex frame and print its fields");
    dec->add_option("hex", fa.hex, "frame bytes as hex")->required();

    auto* qkd_cmd = app.add_subcommand("qkd-sweep", "BB84 key rate over length and switch count (CSV)");
    auto* mck_cmd = app.add_subcommand("mc-k", "Monte-Carlo estimate of the routing factor K");

    std::string sweep, scenario = "central", noise = "on";
    auto* ent_cmd = app.add_subcommand("entdist", "entanglement-distribution fidelity sweeps (CSV)");
    ent_cmd->add_option("--sweep", sweep, "single, length-hops, t1t2-length, proc-t1 or compare")
        ->required()
        ->check(CLI::IsMember({"single", "length-hops", "t1t2-length", "proc-t1", "compare"}));
    ent_cmd->add_option("--scenario", scenario, "central or sender")->check(CLI::IsMember({"central", "sender"}));
    ent_cmd->add_option("--noise", noise, "on, or off for p_L = 0 and infinite T1/T2")
        ->check(CLI::IsMember({"on", "off"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            apply_config_file(cfg, config_path);
        }
        for (const auto& k : config_keys()) {
            if (override_opts[k.key]->count() > 0) {
                apply_setting(cfg, k.key, overrides[k.key]);
            }
        }

        if (frame_cmd->parsed()) {
            return enc->parsed() ? frame_encode(fa, out) : frame_decode(fa, out);
        }
        if (qkd_cmd->parsed()) {
            return qkd_sweep_cmd(cfg, out);
        }
        if (mck_cmd->parsed()) {
            return mc_k_cmd(cfg, out);
        }
        return entdist_cmd(cfg, sweep, scenario, noise, out, err);
    } catch (const frame::DecodeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace qpsn::cli
