// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "misocap/capacity.hpp"
#include "misocap/channel.hpp"

namespace misocap {

enum class Command { capacity, verify, figure1, figure2, figure3, ergodic };

struct SweepSpec {
    double start = 0.0;
    double stop = 0.0;
    int steps = 0; // >= 2
};

struct RunConfig {
    Command command = Command::capacity;
    std::optional<ChannelVector> channel;
    std::vector<double> powers;            // per-antenna budgets, empty if unset
    std::optional<double> power_total;
    SystemParams sys;
    std::optional<SweepSpec> sweep;
    std::uint64_t seed = 1;
    std::int64_t n_samples = 100000;
    std::string output_path;               // empty: stdout
    int workers = 1;
    int instances = 100;                   // verify
    double perturb_q = 0.0;                // verify self-test corruption
    int grid_points = 4096;                // verify n=2 grid oracle
};

/// Raised by parse_config when --help was requested; carries the help text.
struct HelpRequested {
    std::string text;
};

/// Strict complex literal: "a+bi" / "a-bi" / "a" / "bi"; only 'i' accepted,
/// no whitespace.
Complex parse_complex(const std::string& text);

/// Parses subcommand + flags, merging defaults from an optional --config
/// JSON file (flags win; unknown JSON keys rejected).
RunConfig parse_config(const std::vector<std::string>& args);

// Figure and report runners; CSV goes to the stream, byte-stable per config.
void run_figure1(const RunConfig& cfg, std::ostream& csv);
void run_figure2(const RunConfig& cfg, std::ostream& csv);
void run_figure3(const RunConfig& cfg, std::ostream& csv);
void run_capacity(const RunConfig& cfg, std::ostream& human, std::ostream* csv);
void run_ergodic(const RunConfig& cfg, std::ostream& human, std::ostream* csv);
/// Returns 0 when every check passes, 2 otherwise.
int run_verify(const RunConfig& cfg, std::ostream& human, std::ostream* csv);

struct CrossingResult {
    double p1 = 0.0;  // refined equality point of c_sum and c_per_antenna
    double gap = 0.0; // |c_sum - c_per_antenna| at p1
};

/// Grid argmin of |c_sum - c_per_antenna| over p1 in [0, total], refined by
/// bisection on the slope sign to 1e-6 in p1.
CrossingResult detect_crossing(const ChannelVector& h, double total, const SystemParams& sys,
                               int grid_steps);

/// Dispatch; returns the process exit code (0 ok, 2 verification failure).
int run_command(const RunConfig& cfg, std::ostream& out);

std::string format_sig12(double v); // 12 significant digits, C locale

} // namespace misocap
