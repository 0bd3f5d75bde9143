/*!
  \file simulate.hpp
  \brief Cycle-accurate, bit-exact simulation of dataflow graphs.

  Each cycle evaluates the combinational nodes in topological order and then
  updates every register (edge delays, delay nodes, counters) at once.  All
  state starts at zero.  The simulator ignores node latency: latencies only
  describe the hardware a folded design instantiates.
*/

#pragma once

#include <dfgfold/design.hpp>
#include <dfgfold/fixed_point.hpp>
#include <dfgfold/graph.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dfgfold
{

/*! \brief One value sequence per external input; short sequences hold their last value. */
struct stimuli
{
  std::vector<std::string> names;
  std::vector<std::vector<int32_t>> values;

  int32_t at( size_t input, uint64_t cycle ) const;
  uint64_t length() const;
};

/*! \brief Output samples per cycle, optionally flagged valid (folded designs). */
struct trace
{
  std::vector<std::string> names;
  std::vector<uint64_t> cycles;
  std::vector<std::vector<int32_t>> values; /*!< values[output][row] */
  std::vector<bool> valid;                  /*!< empty unless produced for a folded design */

  bool operator==( trace const& ) const = default;
};

class simulator
{
public:
  /*! \brief Throws `graph_error` if the graph fails validation. */
  simulator( dataflow_graph const& g, fixed_format fmt = {} );

  void reset();
  /*! \brief Advances one clock cycle with `inputs` given in the graph's input order. */
  void step( std::span<int32_t const> inputs );
  /*! \brief Values seen by the output nodes during the last step. */
  std::vector<int32_t> const& outputs() const { return outputs_; }
  uint64_t cycle() const { return cycle_; }

private:
  int32_t read( uint32_t edge_index ) const;

  dataflow_graph const& g_;
  fixed_format fmt_;
  std::vector<uint32_t> order_;
  std::vector<std::vector<uint32_t>> port_edges_; /* per node, edge index per input port */
  std::vector<int32_t> values_;
  std::vector<int32_t> state_;
  std::vector<std::vector<int32_t>> lines_; /* per edge ring buffer */
  std::vector<uint32_t> heads_;
  std::vector<int32_t> consts_;
  std::vector<std::vector<uint32_t>> selects_;
  std::vector<int32_t> outputs_;
  uint64_t cycle_{0};
};

trace simulate( dataflow_graph const& g, stimuli const& stim, uint64_t cycles, fixed_format const& fmt = {} );

struct mismatch
{
  uint64_t sample{0};
  std::string output;
  int32_t expected{0};
  int32_t actual{0};
};

struct equivalence_report
{
  bool pass{false};
  std::optional<mismatch> first_mismatch;
  uint32_t latency_offset_used{0};
  uint64_t samples{0};
};

/*! \brief Drives the folded design with one stimulus vector per N-cycle frame.

  The sample for frame k is applied at cycle k*N only (zero elsewhere), so the
  input hold registers are exercised; the folded outputs are read at cycle
  k*N + latency_offset and compared bit-exactly with cycle k of the original.
*/
equivalence_report check_equivalence( dataflow_graph const& original, folded_design const& folded, stimuli const& stim,
                                      uint64_t samples, fixed_format const& fmt = {} );

/*! \brief Seeded uniform random stimuli in [-range, range) for every input of `g`. */
stimuli random_stimuli( dataflow_graph const& g, uint64_t samples, uint64_t seed, double range, fixed_format const& fmt = {} );
stimuli impulse_stimuli( dataflow_graph const& g, uint64_t samples, double amplitude = 1.0, fixed_format const& fmt = {} );
stimuli step_stimuli( dataflow_graph const& g, uint64_t samples, double amplitude = 1.0, fixed_format const& fmt = {} );

/*! \brief CSV with a `cycle` column and one column per input; values are
    decimal fixed-point or `0x` raw words. */
stimuli parse_stimuli_csv( std::string_view text, fixed_format const& fmt = {} );
std::string stimuli_to_csv( stimuli const& s, fixed_format const& fmt = {} );
std::string trace_to_csv( trace const& t, fixed_format const& fmt = {} );

} // namespace dfgfold
