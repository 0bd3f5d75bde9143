/*!
  \file bench.hpp
  \brief Benchmark circuit generators, built-in core patterns and the reference folding configurations.

  Node naming:

  - FIR: input `x`, output `y`, coefficients `c00..`, taps `m00..`, tap line
    `d01..`, accumulation `s01..` with `s01 = m00 + m01` and
    `s_i = s_{i-1} + m_i`.
  - IIR: second-order recursive section `w = x + a1*w[n-1] + a2*w[n-2]`,
    `y = w + b1*w[n-1] + b2*w[n-2]`.
  - PCT: phase `theta` (in turns) and currents `ia, ib, ic`; outputs `d, q`.
  - TPID: per controller j, inputs `r<j>, y<j>` and output `u<j>`; nodes `pid<j>_*`.

  Multipliers take the signal on port 0 and the coefficient on port 1; adders
  take the accumulated value on port 0 and the new product on port 1.
*/

#pragma once

#include <dfgfold/graph.hpp>
#include <dfgfold/pattern.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dfgfold
{

/*! \brief Hamming-windowed low-pass taps rounded to multiples of 2^-10. */
std::vector<double> default_fir_coefficients( uint32_t taps );

/*! \brief Direct-form FIR.  Throws `std::invalid_argument` when `coefficients.size() != taps` or taps is 0. */
dataflow_graph gen_fir( uint32_t taps, std::vector<double> const& coefficients );

struct iir_coefficients
{
  double a1{0.5};
  double a2{-0.25};
  double b1{0.75};
  double b2{0.125};
};

dataflow_graph gen_iir( iir_coefficients const& k = {} );

/*! \brief Clarke and Park transforms from three phase currents to (d, q).

  Each term `i_k * cos(theta - phi_k)` or `i_k * sin(theta - phi_k)` is a
  chain sub -> sine-lut -> mult with a phase offset constant.  Cosines use a
  quarter-turn offset, and terms that are added use an extra half turn so the
  sums can be formed with subtractions.
*/
dataflow_graph gen_pct();

struct pid_gains
{
  double kp{0.5};
  double ki{0.125};
  double kd{0.25};
};

dataflow_graph gen_tpid( std::array<pid_gains, 3> const& gains = { pid_gains{}, pid_gains{ 0.75, 0.0625, 0.125 }, pid_gains{ 0.25, 0.25, 0.5 } } );

/*! \brief Discrete PI controller `u = Kp*e + I`, `I = I[n-1] + Ki*e`. */
dataflow_graph gen_pi( double kp = 0.5, double ki = 0.25 );

std::vector<std::string> bench_names();
/*! \brief Generator by name (fir, iir, pct, tpid, pi) with default parameters. */
std::optional<dataflow_graph> gen_bench( std::string_view name );

std::vector<std::string> builtin_pattern_names();
std::optional<core_pattern> builtin_pattern( std::string_view name );

struct class_request
{
  std::string pattern;
  uint32_t count{0};
  /*! \brief Fixed embeddings (template node id -> circuit node id); empty: chosen by cover selection. */
  std::vector<std::map<std::string, std::string>> instances{};
};

struct config_request
{
  std::string name;
  std::vector<class_request> classes;
};

/*! \brief Reference folding configurations for a benchmark with default parameters, in table order. */
std::vector<config_request> reference_configs( std::string_view bench );

/*! \brief Matches each requested pattern and selects disjoint instances.  Throws `cover_error`. */
folding_config instantiate( dataflow_graph const& g, config_request const& request );

/*! \brief The request as a configuration document with built-in pattern names. */
nlohmann::json request_to_json( config_request const& request );

} // namespace dfgfold
