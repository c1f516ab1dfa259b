#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qpsn/cli.hpp"
#include "qpsn/entdist.hpp"
#include "qpsn/frame_codec.hpp"
#include "qpsn/qkd_model.hpp"
#include "qpsn/quantum_state.hpp"
#include "qpsn/switching.hpp"

namespace py = pybind11;

namespace {

using qpsn::qstate::DensityMatrix;

DensityMatrix to_state(const Eigen::MatrixXcd& m)
{
    return DensityMatrix::from_matrix(qpsn::qstate::Matrix(m));
}

Eigen::MatrixXcd to_array(const DensityMatrix& rho)
{
    return Eigen::MatrixXcd(rho.matrix());
}

py::bytes to_bytes(const qpsn::frame::Octets& o)
{
    return py::bytes(reinterpret_cast<const char*>(o.data()), o.size());
}

qpsn::frame::Octets from_bytes(const py::bytes& b)
{
    const std::string s = b;
    return qpsn::frame::Octets(s.begin(), s.end());
}

py::dict row_dict(const qpsn::ent::FidelityRow& r)
{
    py::dict d;
    d["scenario"] = qpsn::ent::to_string(r.scenario);
    d["total_length_km"] = r.total_length_km;
    d["hops"] = r.hops;
    d["T1_ns"] = r.T1_ns;
    d["T2_ns"] = r.T2_ns;
    d["proc_ns"] = r.proc_ns;
    d["pair_index"] = r.pair_index;
    d["fidelity"] = r.fidelity;
    return d;
}

py::list rows_list(const std::vector<qpsn::ent::FidelityRow>& rows)
{
    py::list out;
    for (const auto& r : rows) out.append(row_dict(r));
    return out;
}

qpsn::ent::ScenarioKind parse_kind(const std::string& s)
{
    if (s == "central") return qpsn::ent::ScenarioKind::Central;
    if (s == "sender") return qpsn::ent::ScenarioKind::Sender;
    throw py::value_error("scenario must be 'central' or 'sender'");
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Packet-switched quantum network link-layer simulator (C++ core)";

    // -- quantum state -------------------------------------------------------
    py::register_exception<qpsn::qstate::StateError>(m, "StateError", PyExc_ValueError);

    m.def("make_epr", [] { return to_array(qpsn::qstate::make_epr()); },
          "Density matrix of (|00> + |11>)/sqrt(2).");
    m.def("depolar_prob", &qpsn::qstate::depolar_prob, py::arg("length_km"), py::arg("p_per_km"));
    m.def("apply_depolarizing",
          [](const Eigen::MatrixXcd& rho, int qubit, double p) {
              return to_array(qpsn::qstate::apply_depolarizing(to_state(rho), qubit, p));
          },
          py::arg("rho"), py::arg("qubit"), py::arg("p"));
    m.def("apply_t1t2",
          [](const Eigen::MatrixXcd& rho, int qubit, double t, double T1, double T2) {
              return to_array(qpsn::qstate::apply_t1t2(to_state(rho), qubit, t, T1, T2));
          },
          py::arg("rho"), py::arg("qubit"), py::arg("t"), py::arg("T1"), py::arg("T2"));
    m.def("fidelity", [](const Eigen::MatrixXcd& rho) { return qpsn::qstate::fidelity(to_state(rho)); },
          py::arg("rho"));

    // -- frame codec ---------------------------------------------------------
    namespace fr = qpsn::frame;
    // Leaked on purpose: the translator may run after module teardown starts.
    static PyObject* decode_error =
        PyErr_NewException("qpsn._core.DecodeError", PyExc_ValueError, nullptr);
    m.attr("DecodeError") = py::handle(decode_error);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const fr::DecodeError& e) {
            py::object err = py::handle(decode_error)(e.what());
            err.attr("kind") = fr::to_string(e.kind());
            err.attr("offset") = e.offset();
            err.attr("tlv") = e.tlv();
            PyErr_SetObject(decode_error, err.ptr());
        }
    });
    py::register_exception<fr::EncodeError>(m, "EncodeError", PyExc_ValueError);

    py::enum_<fr::Role>(m, "Role").value("Header", fr::Role::Header).value("Trailer", fr::Role::Trailer);

    py::class_<fr::QduDescriptor>(m, "QduDescriptor")
        .def(py::init<>())
        .def_readwrite("payload_len", &fr::QduDescriptor::payload_len)
        .def_readwrite("encoding_scheme", &fr::QduDescriptor::encoding_scheme)
        .def_readwrite("emission_period", &fr::QduDescriptor::emission_period)
        .def_readwrite("multiplexing", &fr::QduDescriptor::multiplexing)
        .def(py::self == py::self);

    py::class_<fr::FrameHeader>(m, "FrameHeader")
        .def(py::init<>())
        .def_property(
            "dest_addr", [](const fr::FrameHeader& h) { return fr::format_mac(h.dest_addr); },
            [](fr::FrameHeader& h, const std::string& s) { h.dest_addr = fr::parse_mac(s); })
        .def_property(
            "src_addr", [](const fr::FrameHeader& h) { return fr::format_mac(h.src_addr); },
            [](fr::FrameHeader& h, const std::string& s) { h.src_addr = fr::parse_mac(s); })
        .def_readwrite("role", &fr::FrameHeader::role)
        .def_readwrite("qdu", &fr::FrameHeader::qdu)
        .def_readwrite("guard_time", &fr::FrameHeader::guard_time)
        .def_readwrite("elapsed_memory_time", &fr::FrameHeader::elapsed_memory_time)
        .def_readwrite("max_cutoff_time", &fr::FrameHeader::max_cutoff_time)
        .def_readwrite("qec_protocol", &fr::FrameHeader::qec_protocol)
        .def_readwrite("ttl", &fr::FrameHeader::ttl)
        .def(py::self == py::self);

    m.def("encode_frame", [](const fr::FrameHeader& h) { return to_bytes(fr::encode(h)); }, py::arg("header"));
    m.def("decode_frame",
          [](const py::bytes& b) {
              const auto d = fr::decode(from_bytes(b));
              py::list unknown;
              for (const auto& t : d.unknown) {
                  unknown.append(py::make_tuple(t.offset, t.type, to_bytes(t.value)));
              }
              return py::make_tuple(d.header, unknown);
          },
          py::arg("data"), "Returns (FrameHeader, [(offset, type, value), ...]).");
    m.def("make_trailer", &fr::make_trailer, py::arg("header"));
    m.def("bump_elapsed_memory",
          [](const fr::FrameHeader& h, std::uint64_t delta) {
              const auto r = fr::bump_elapsed_memory(h, delta);
              return py::make_tuple(r.header, r.expired);
          },
          py::arg("header"), py::arg("delta"), "Returns (header, expired).");

    // -- simcore -------------------------------------------------------------
    namespace sim = qpsn::sim;
    m.def("propagation_delay", &sim::propagation_delay, py::arg("length_km"));
    m.def("burst_step", &sim::burst_step, py::arg("guard"), py::arg("processing_time"),
          "Remaining guard time, or None when the payload is dropped.");
    m.def("retransmit_guard", &sim::retransmit_guard, py::arg("guard0"), py::arg("attempt"), py::arg("factor") = 2.0);
    m.def("relay_pause", &sim::relay_pause, py::arg("processing_time"), py::arg("payload_len"),
          py::arg("emission_period"));
    m.def("relay_storage_schedule",
          [](sim::Nanos header_arrival, sim::Nanos pause, std::int64_t n, sim::Nanos period) {
              std::vector<sim::Nanos> durations;
              for (const auto& s : sim::relay_storage_schedule(sim::SimTime{header_arrival}, pause, n, period)) {
                  durations.push_back(s.duration());
              }
              return durations;
          },
          py::arg("header_arrival"), py::arg("pause"), py::arg("payload_len"), py::arg("emission_period"));
    m.def("simulate_burst",
          [](int relays, double total_km, sim::Nanos guard0, sim::Nanos processing_time, double availability,
             std::uint64_t seed, int max_attempts) {
              const auto chain = sim::Topology::linear_chain(relays, total_km, 0.0);
              const sim::SwitchPolicy policy{sim::BurstPolicy{guard0, 2.0}, availability};
              const auto run = sim::simulate_burst(chain, policy, processing_time, seed, max_attempts);
              py::list attempts;
              for (const auto& a : run.attempts) {
                  py::dict d;
                  d["guard"] = a.guard;
                  d["delivered"] = a.delivered;
                  d["relays_visited"] = a.relays_visited;
                  d["hops_forwarded"] = a.hops_forwarded;
                  d["drop_relay"] = a.drop_relay;
                  d["reason"] = sim::to_string(a.reason);
                  attempts.append(d);
              }
              return attempts;
          },
          py::arg("relays"), py::arg("total_km"), py::arg("guard0"), py::arg("processing_time"),
          py::arg("availability") = 1.0, py::arg("seed") = 1, py::arg("max_attempts") = 1);

    // -- QKD -----------------------------------------------------------------
    namespace qkd = qpsn::qkd;
    py::class_<qkd::QkdParams>(m, "QkdParams")
        .def(py::init<>())
        .def_readwrite("length_km", &qkd::QkdParams::length_km)
        .def_readwrite("n", &qkd::QkdParams::n)
        .def_readwrite("alpha_db_per_km", &qkd::QkdParams::alpha_db_per_km)
        .def_readwrite("eta_det", &qkd::QkdParams::eta_det)
        .def_readwrite("p_dark", &qkd::QkdParams::p_dark)
        .def_readwrite("f", &qkd::QkdParams::f)
        .def_readwrite("e_d", &qkd::QkdParams::e_d)
        .def_readwrite("P", &qkd::QkdParams::P)
        .def_readwrite("tq_over_tp", &qkd::QkdParams::tq_over_tp);

    py::class_<qkd::QkdResult>(m, "QkdResult")
        .def_readonly("Q", &qkd::QkdResult::Q)
        .def_readonly("e_Z", &qkd::QkdResult::e_Z)
        .def_readonly("e_X", &qkd::QkdResult::e_X)
        .def_readonly("K", &qkd::QkdResult::K)
        .def_readonly("R", &qkd::QkdResult::R);

    m.def("binary_entropy", &qkd::binary_entropy, py::arg("x"));
    m.def("k_factor", &qkd::k_factor, py::arg("P"), py::arg("n"), py::arg("tq_over_tp"));
    m.def("gain_qber",
          [](const qkd::QkdParams& p) {
              const auto g = qkd::gain_qber(p);
              return py::make_tuple(g.Q, g.e);
          },
          py::arg("params"), "Returns (Q, e).");
    m.def("secret_key_rate", &qkd::secret_key_rate, py::arg("params"));
    m.def("monte_carlo_k", &qkd::monte_carlo_k, py::arg("P"), py::arg("n"), py::arg("tq_over_tp"), py::arg("trials"),
          py::arg("seed"));
    m.def("qkd_sweep",
          [](const std::vector<double>& lengths, const std::vector<int>& ns, const qkd::QkdParams& base) {
              py::list out;
              for (const auto& r : qkd::qkd_sweep(lengths, ns, base)) {
                  out.append(py::make_tuple(r.length_km, r.n, r.Q, r.e, r.K, r.R));
              }
              return out;
          },
          py::arg("lengths"), py::arg("n_list"), py::arg("params"), "Rows of (L_km, n, Q, e, K, R).");

    // -- entanglement distribution ------------------------------------------
    namespace ent = qpsn::ent;
    py::class_<ent::EntParams>(m, "EntParams")
        .def(py::init<>())
        .def_readwrite("total_length_km", &ent::EntParams::total_length_km)
        .def_readwrite("T1_ns", &ent::EntParams::T1_ns)
        .def_readwrite("T2_ns", &ent::EntParams::T2_ns)
        .def_readwrite("processing_time", &ent::EntParams::processing_time)
        .def_readwrite("emission_period", &ent::EntParams::emission_period)
        .def_readwrite("qubits_per_frame", &ent::EntParams::qubits_per_frame)
        .def_readwrite("p_per_km", &ent::EntParams::p_per_km);

    m.def("run_scenario",
          [](const std::string& scenario, int hops, const ent::EntParams& params) {
              py::list out;
              for (const auto& r : ent::run_scenario(ent::make_scenario(parse_kind(scenario), hops), params)) {
                  out.append(py::make_tuple(r.pair_index, r.arrival_time.ns, r.fidelity));
              }
              return out;
          },
          py::arg("scenario"), py::arg("hops"), py::arg("params"),
          "Per-pair (pair_index, arrival_ns, fidelity). Central: hops relays on each arm.");
    m.def("sweep_length_hops",
          [](const ent::EntParams& p, const std::vector<double>& lengths, const std::vector<int>& hops,
             const std::string& scenario) { return rows_list(ent::sweep_length_hops(p, lengths, hops, parse_kind(scenario))); },
          py::arg("params"), py::arg("lengths"), py::arg("hops_list"), py::arg("scenario") = "central");
    m.def("sweep_t1t2_length",
          [](const ent::EntParams& p, const std::vector<double>& ts, const std::vector<double>& lengths, int hops) {
              return rows_list(ent::sweep_t1t2_length(p, ts, lengths, hops));
          },
          py::arg("params"), py::arg("t_grid"), py::arg("lengths"), py::arg("hops") = 3);
    m.def("sweep_proc_t1",
          [](const ent::EntParams& p, const std::vector<sim::Nanos>& procs, const std::vector<double>& ts, int hops,
             double hop_km) { return rows_list(ent::sweep_proc_t1(p, procs, ts, hops, hop_km)); },
          py::arg("params"), py::arg("proc_grid"), py::arg("t_grid"), py::arg("hops") = 3, py::arg("hop_km") = 20.0);
    m.def("compare_scenarios",
          [](const ent::EntParams& p, const std::vector<double>& lengths, int hops) {
              const auto c = ent::compare_scenarios(p, lengths, hops);
              py::dict d;
              d["rows"] = rows_list(c.rows);
              d["central_crossing"] = c.central_crossing;
              d["sender_crossing"] = c.sender_crossing;
              return d;
          },
          py::arg("params"), py::arg("lengths"), py::arg("hops") = 1);

    // -- CLI -----------------------------------------------------------------
    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::ostringstream out, err;
              const int code = qpsn::cli::run(args, out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
