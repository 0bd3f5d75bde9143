/*!
  \file fold.hpp
  \brief Rewrites a circuit into its time-multiplexed form.

  Each core class becomes one physical unit.  A unit input port driven from
  more than one distinct (signal, register count) pair gets a multiplexer
  whose data inputs carry the registers given by the folding equation; a
  single source becomes a plain edge with those registers.  Registers inside
  a unit are interleaved N times.  Unfolded nodes are copied and keep their
  slot.  One mod-N counter drives every select input.

  I/O timing: an external input is captured at counter value 0 and held for
  the frame; an external output is captured when its value for the frame is
  produced and held until the next one.  Sample k is applied at cycle k*N and
  its outputs are valid at cycle k*N + N - 1.
*/

#pragma once

#include <dfgfold/design.hpp>
#include <dfgfold/graph.hpp>
#include <dfgfold/pattern.hpp>
#include <dfgfold/schedule.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dfgfold
{

/*! \brief A circuit prepared for folding.

  `canonical` has all delay nodes outside the selected instances merged into
  edge delays; `config` refers to node indices of `canonical`.
*/
struct fold_problem
{
  dataflow_graph canonical;
  folding_config config;
  core_graph cores;
};

/*! \brief Canonicalizes `g` around the instances of `config` and builds the core graph.

  Throws `graph_error` when the graph contains controller nodes (mux,
  counter) or the config does not fit the graph.
*/
fold_problem prepare_fold( dataflow_graph const& g, folding_config const& config );

/*! \brief Re-expresses instance node indices of `config` (given for `from`) in terms of `to`. */
folding_config remap_config( folding_config const& config, dataflow_graph const& from, dataflow_graph const& to );

/*! \brief Folds a prepared problem.  Throws `schedule_error` listing the
    violations when `s` is not a valid schedule of `p.cores`. */
folded_design fold( fold_problem const& p, schedule const& s );

folded_design fold( dataflow_graph const& g, folding_config const& config, schedule const& s );

struct fold_result
{
  fold_problem problem;
  schedule sched;
  folded_design design;
};

/*! \brief prepare_fold, list_schedule and fold in one step. */
fold_result fold_with_schedule( dataflow_graph const& g, folding_config const& config,
                                std::optional<uint32_t> folding_factor_hint = std::nullopt );

/*! \brief Replaces every delay node by a chain of N delay nodes and scales
    internal edge delays by N.

  The chain for node `d` is `d -> d_r1 -> ... -> d_r{N-1}`; consumers read the
  last element.  Boundary ports are unchanged.
*/
core_pattern interleave_registers( core_pattern const& p, uint32_t folding_factor );

inline constexpr char const* controller_id = "ctl_counter";

/*! \brief Adds the mod-N counter and wires it to the select port of every mux in `select_table`.

  Throws `std::invalid_argument` when a table has a length other than N or an
  entry that is not below N.
*/
void build_controller( graph_builder& b, uint32_t folding_factor, std::map<std::string, std::vector<uint32_t>> const& select_table,
                       uint32_t width = 32 );

struct io_binding
{
  std::string id;          /*!< external output node */
  std::string signal;      /*!< its driver in the folded graph */
  uint32_t delay{0};       /*!< registers between `signal` and the output latch */
  uint32_t slot{0};        /*!< counter value at which the value is produced */
  uint32_t source_delay{0}; /*!< register count of the original edge */
};

/*! \brief Inserts input hold and output latch multiplexers (none for N = 1).

  For inputs, returns the signal that carries the held value; consumers must
  be wired to it.  Outputs are wired from their binding's signal.  Records
  select tables, provenance and the latency offset in `meta`.
*/
std::map<std::string, std::string> wrap_io( graph_builder& b, fold_metadata& meta, std::vector<std::string> const& inputs,
                                            std::vector<io_binding> const& outputs, uint32_t width = 32 );

} // namespace dfgfold
