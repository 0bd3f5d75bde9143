/*!
  \file explore.hpp
  \brief Design-space exploration over folding configurations and Pareto filtering.
*/

#pragma once

#include <dfgfold/cost.hpp>
#include <dfgfold/fixed_point.hpp>
#include <dfgfold/fold.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dfgfold
{

struct named_config
{
  std::string name;
  folding_config config;
};

struct explore_options
{
  uint64_t samples{1000};
  uint64_t seed{1};
  double range{1.0};
  bool impulse_and_step{true};
  fixed_format format{};
  weight_table weights{ default_weights() };
  delay_table delays{ default_delays() };
  unsigned threads{0}; /*!< 0: hardware concurrency */
};

struct exploration_row
{
  std::string name;
  std::string notation;
  uint32_t folding_factor{0};
  cost_estimate cost;
  double latency_proxy{0.0};
  bool equivalent{false};
  bool pareto{false};
  std::string failure;          /*!< empty on success */
  uint32_t arcs_checked{0};
  uint32_t negative_arcs{0};    /*!< arcs with D < 0, always 0 for a valid schedule */
  std::optional<benefit_report> benefit;
};

/*! \brief A row for a configuration that could not be built. */
exploration_row failed_row( std::string name, std::string reason );

/*! \brief Schedules, folds, verifies and costs every config in parallel.

  Rows are sorted by (lut_units, latency_proxy, name); failed rows follow in
  name order.  The `pareto` flag is set on the rows returned by `pareto`.
*/
std::vector<exploration_row> explore( dataflow_graph const& g, std::vector<named_config> const& configs, explore_options const& opts = {} );

/*! \brief Non-dominated equivalent rows in (lut_units, latency_proxy), sorted by latency_proxy.

  Of rows with identical coordinates only the first by notation (then name)
  is kept.
*/
std::vector<exploration_row> pareto( std::vector<exploration_row> const& rows );

/*! \brief Marks the rows of `rows` that `pareto` keeps. */
void mark_pareto( std::vector<exploration_row>& rows );

std::string rows_to_csv( std::vector<exploration_row> const& rows );
nlohmann::json rows_to_json( std::vector<exploration_row> const& rows );

/*! \brief Gnuplot script plotting lut_units over latency_proxy from the CSV file `csv_path`. */
std::string gnuplot_script( std::string const& csv_path, std::string const& title );

} // namespace dfgfold
