// io.hpp — CSV interchange: ensemble dumps, control import/export,
// cost and duality tables.  All numbers are written with %.17g so equal
// runs produce byte-identical files.

#pragma once

#include "seeopt/backward_types.hpp"
#include "seeopt/control.hpp"
#include "seeopt/forward.hpp"
#include "seeopt/verify.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seeopt {

namespace io {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // fixed newlines on all platforms
    if (!out)
        throw std::runtime_error("cannot open output file '" + path + "'");
    return out;
}

} // namespace io

/// forward.csv: one row per (path, step) with columns path,t,x_1..x_N.
inline void write_forward_csv(const std::string& path, const ForwardPathEnsemble& ens) {
    auto out = io::open_out(path);
    out << "path,t";
    for (int k = 1; k <= ens.n_modes(); ++k) out << ",x_" << k;
    out << "\n";
    for (int p = 0; p < ens.n_paths(); ++p)
        for (int i = 0; i <= ens.n_steps(); ++i) {
            out << p << ',' << io::num(ens.grid[i]);
            for (int k = 0; k < ens.n_modes(); ++k)
                out << ',' << io::num(ens.states[static_cast<std::size_t>(p)](i, k));
            out << "\n";
        }
}

/// adjoint.csv: columns path,t,y_1..y_N,z_11..z_NN.  Z is a left-endpoint
/// process; the terminal row carries zeros in the z columns.
inline void write_adjoint_csv(const std::string& path, const AdjointPairEnsemble& adj) {
    auto out = io::open_out(path);
    const int n = adj.Y.empty() ? 0 : static_cast<int>(adj.Y.front().cols());
    out << "path,t";
    for (int k = 1; k <= n; ++k) out << ",y_" << k;
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b) out << ",z_" << a << b;
    out << "\n";
    for (int p = 0; p < adj.n_paths(); ++p)
        for (int i = 0; i <= adj.n_steps(); ++i) {
            out << p << ',' << io::num(adj.grid[i]);
            for (int k = 0; k < n; ++k)
                out << ',' << io::num(adj.Y[static_cast<std::size_t>(p)](i, k));
            if (i < adj.n_steps()) {
                const HSMatrix& z = adj.z(p, i);
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) out << ',' << io::num(z(a, b));
            } else {
                for (int k = 0; k < n * n; ++k) out << ",0";
            }
            out << "\n";
        }
}

/// control.csv: columns path,step,nu_1..nu_m; one row per (path, step).
inline void write_control_csv(const std::string& path, const ForwardPathEnsemble& ens) {
    auto out = io::open_out(path);
    const int m = ens.realized_control.empty()
                      ? 0
                      : static_cast<int>(ens.realized_control.front().cols());
    out << "path,step";
    for (int j = 1; j <= m; ++j) out << ",nu_" << j;
    out << "\n";
    for (int p = 0; p < ens.n_paths(); ++p)
        for (int i = 0; i < ens.n_steps(); ++i) {
            out << p << ',' << i;
            for (int j = 0; j < m; ++j)
                out << ',' << io::num(ens.realized_control[static_cast<std::size_t>(p)](i, j));
            out << "\n";
        }
}

/// Reads a control.csv with the documented schema into a per-path stored
/// control.  Validates row count, finiteness and membership in U; violations
/// raise ConfigError-style exceptions naming the offending row.
inline ControlProcess read_control_csv(const std::string& path, const TimeGrid& grid,
                                       const ControlSet& U, int n_paths) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open control file '" + path + "'");
    const int n_steps = static_cast<int>(grid.size()) - 1;
    const int m = U.dim();

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("control file '" + path + "': empty file");
    {
        std::string expect = "path,step";
        for (int j = 1; j <= m; ++j) expect += ",nu_" + std::to_string(j);
        // tolerate trailing carriage return
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != expect)
            throw std::runtime_error("control file '" + path + "': bad header, expected '" +
                                     expect + "'");
    }

    std::vector<Eigen::MatrixXd> values(
        static_cast<std::size_t>(n_paths),
        Eigen::MatrixXd::Constant(n_steps, m, std::numeric_limits<double>::quiet_NaN()));
    long long n_rows = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (static_cast<int>(fields.size()) != 2 + m)
            throw std::runtime_error("control file row " + std::to_string(lineno) +
                                     ": expected " + std::to_string(2 + m) + " fields");
        int p = 0, i = 0;
        ControlPoint nu(m);
        try {
            p = std::stoi(fields[0]);
            i = std::stoi(fields[1]);
            for (int j = 0; j < m; ++j)
                nu[j] = std::stod(fields[static_cast<std::size_t>(2 + j)]);
        } catch (const std::exception&) {
            throw std::runtime_error("control file row " + std::to_string(lineno) +
                                     ": unparseable field");
        }
        if (p < 0 || p >= n_paths || i < 0 || i >= n_steps)
            throw std::runtime_error("control file row " + std::to_string(lineno) +
                                     ": (path, step) out of range");
        if (!all_finite(nu))
            throw std::runtime_error("control file row " + std::to_string(lineno) +
                                     ": non-finite control value");
        if (!U.contains(nu, 1e-12))
            throw std::runtime_error("control file row " + std::to_string(lineno) +
                                     ": control value outside U");
        values[static_cast<std::size_t>(p)].row(i) = nu.transpose();
        ++n_rows;
    }
    if (n_rows != static_cast<long long>(n_paths) * n_steps)
        throw std::runtime_error("control file '" + path + "': expected " +
                                 std::to_string(static_cast<long long>(n_paths) * n_steps) +
                                 " rows, got " + std::to_string(n_rows));
    return ControlProcess::from_paths(grid, U, std::move(values));
}

/// costs.csv: candidate row first, then one row per alternative.
inline void write_costs_csv(const std::string& path, const CostComparison& cmp,
                            const std::vector<std::string>& labels) {
    if (labels.size() != cmp.rows.size())
        throw std::invalid_argument("write_costs_csv: label count mismatch");
    auto out = io::open_out(path);
    out << "label,j,j_stderr,diff_vs_candidate,diff_stderr,flagged_better\n";
    out << "candidate," << io::num(cmp.j_candidate) << ','
        << io::num(cmp.j_candidate_stderr) << ",0,0,0\n";
    for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
        const auto& r = cmp.rows[i];
        out << labels[i] << ',' << io::num(r.j_alt) << ',' << io::num(r.j_alt_stderr)
            << ',' << io::num(r.diff) << ',' << io::num(r.diff_stderr) << ','
            << (r.better ? 1 : 0) << "\n";
    }
}

/// duality.csv: one row per alternative control.
inline void write_duality_csv(const std::string& path,
                              const std::vector<DualityCheckResult>& rows) {
    auto out = io::open_out(path);
    out << "alt,lhs,lhs_stderr,rhs,rhs_stderr,gap,combined_stderr,tolerance,pass\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& d = rows[i];
        out << i << ',' << io::num(d.lhs) << ',' << io::num(d.lhs_stderr) << ','
            << io::num(d.rhs) << ',' << io::num(d.rhs_stderr) << ',' << io::num(d.gap)
            << ',' << io::num(d.combined_stderr) << ','
            << io::num(3.0 * d.combined_stderr + d.bias_tol) << ',' << (d.pass() ? 1 : 0)
            << "\n";
    }
}

} // namespace seeopt
