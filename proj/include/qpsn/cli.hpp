#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qpsn/entdist.hpp"
#include "qpsn/qkd_model.hpp"

namespace qpsn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Subcommands:
///   frame encode|decode, qkd-sweep, mc-k, entdist
/// Returns 0 on success, 1 on internal error, 2 on usage or parse error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Header "L_km,n,Q,e,K,R".
void write_qkd_csv(std::ostream& os, std::span<const qkd::SweepRow> rows);

/// Header "scenario,total_length_km,hops,T1_ns,T2_ns,proc_ns,pair_index,fidelity".
void write_fidelity_csv(std::ostream& os, std::span<const ent::FidelityRow> rows);

/// %.12g, with "inf" for infinities.
std::string format_number(double v);

}  // namespace qpsn::cli
