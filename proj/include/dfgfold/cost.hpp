/*!
  \file cost.hpp
  \brief Structural area and timing proxies and the folding benefit test.

  Area is counted in lut units: a per-kind weight for every logic node (mux
  weights count per data input) plus one unit per register bit.  Multipliers
  are counted separately as mult units.  These are comparators for
  exploration, not synthesis results.
*/

#pragma once

#include <dfgfold/design.hpp>
#include <dfgfold/graph.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace dfgfold
{

/*! \brief Kind name -> lut units (mux: per data input). */
using weight_table = std::map<std::string, uint64_t, std::less<>>;
/*! \brief Kind name -> combinational delay in ns. */
using delay_table = std::map<std::string, double, std::less<>>;

weight_table default_weights();
delay_table default_delays();

/*! \brief Reads a JSON object of kind -> value and overlays it on the defaults.  Throws `parse_error`. */
weight_table parse_weights( std::string_view text );
delay_table parse_delays( std::string_view text );

struct cost_breakdown
{
  uint64_t core{0};
  uint64_t remain{0};
  uint64_t overhead{0};
};

struct cost_estimate
{
  uint32_t folding_factor{1};
  uint32_t mult_units{0};
  uint64_t lut_units{0};
  uint64_t reg_bits{0};
  uint32_t mux_inputs{0};
  double tmin_proxy{0.0};
  std::optional<cost_breakdown> breakdown;

  double latency_proxy() const { return folding_factor * tmin_proxy; }
};

class cost_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Cost of an unfolded graph; everything is counted as remaining logic.
    Throws `cost_error` when a node kind is missing from a table. */
cost_estimate estimate_cost( dataflow_graph const& g, weight_table const& weights = default_weights(),
                             delay_table const& delays = default_delays() );

/*! \brief Cost of a folded design, split into core, remaining and overhead logic by its provenance. */
cost_estimate estimate_cost( folded_design const& d, weight_table const& weights = default_weights(),
                             delay_table const& delays = default_delays() );

/*! \brief Longest zero-register path, summing per-kind delays. */
double tmin_proxy( dataflow_graph const& g, delay_table const& delays = default_delays() );

struct benefit_report
{
  bool beneficial{false};        /*!< S_f < S_o */
  int64_t margin{0};             /*!< S_o - S_f */
  bool overhead_below_saving{false}; /*!< S_overhead < (N - 1) * S_core */
  bool precondition{false};      /*!< N * S_core + S_remain == S_o */
  bool agree{true};              /*!< both tests agree; only meaningful when the precondition holds */
  uint32_t folding_factor{1};
  uint64_t original{0};
  uint64_t folded{0};
  cost_breakdown parts;
};

/*! \brief S_overhead < (N - 1) * S_core. */
bool overhead_below_saving( uint64_t overhead, uint32_t folding_factor, uint64_t core );

/*! \brief Throws `cost_error` when the folded estimate has no breakdown. */
benefit_report folding_benefit( cost_estimate const& original, cost_estimate const& folded );

nlohmann::json cost_to_json( cost_estimate const& c );

} // namespace dfgfold
