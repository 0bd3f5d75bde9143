/*!
  \file schedule.hpp
  \brief Core graph construction, list scheduling and the folding equation.

  Every core instance and every unfolded node becomes one vertex of the core
  graph.  An arc carries the register count w_e of the circuit edge it stands
  for and the latency P_u of its producer.  A schedule assigns each vertex a
  time slot u in [0, N); the registers needed on an arc follow from

      D = N * w_e - P_u + v - u,

  which must be non-negative for every arc.
*/

#pragma once

#include <dfgfold/graph.hpp>
#include <dfgfold/pattern.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dfgfold
{

struct core_vertex
{
  std::string name;
  std::optional<uint32_t> class_id; /*!< empty for unfolded nodes */
  uint32_t instance{0};             /*!< index inside its class */
  uint32_t latency{0};
  uint32_t unit{0};            /*!< physical unit executing this vertex */
  std::vector<uint32_t> nodes; /*!< circuit nodes, empty for synthetic core graphs */
  bool pinned{false};          /*!< external inputs are sampled at slot 0 */
};

struct core_arc
{
  uint32_t src{0};
  uint32_t dst{0};
  uint32_t src_local{0}; /*!< node position inside the producing unit */
  uint32_t dst_local{0};
  uint32_t dst_port{0};
  uint32_t delay{0};   /*!< w_e */
  uint32_t latency{0}; /*!< P_u */
  bool combinational_source{true};
  bool ordering{true}; /*!< false when the producer is a register */
  std::optional<uint32_t> edge; /*!< circuit edge index */
};

/*! \brief Node-level view of one physical unit. */
struct unit_info
{
  uint32_t local_nodes{1};
  /*! \brief Zero-delay internal connections (src_local, dst_local). */
  std::vector<std::pair<uint32_t, uint32_t>> combinational;
};

struct core_graph
{
  std::vector<core_vertex> vertices;
  std::vector<core_arc> arcs;
  std::vector<unit_info> units;
  uint32_t num_classes{0};
  std::vector<uint32_t> vertex_of; /*!< circuit node -> vertex */
  std::vector<uint32_t> local_of;  /*!< circuit node -> position in its unit */

  /*! \brief Number of instances per class. */
  std::vector<uint32_t> class_sizes() const;
};

/*! \brief Builds the core graph of a canonical circuit.

  `g` must already be canonical with instance-internal delay nodes
  protected.  Const-input nodes are external sources and always stay
  singleton vertices, even when a pattern covers them.
*/
core_graph build_core_graph( dataflow_graph const& g, folding_config const& config );

/*! \brief Longest latency path through a template's zero-delay edges. */
uint32_t pattern_latency( core_pattern const& p );

struct schedule
{
  uint32_t folding_factor{1};
  std::vector<uint32_t> slots; /*!< per vertex */
};

/*! \brief D = N * w_e - P_u + v - u. */
int64_t folding_delay( uint32_t delay, uint32_t latency, uint32_t u, uint32_t v, uint32_t folding_factor );

/*! \brief Slots an instance blocks on its unit: max(P, 1). */
inline uint32_t occupancy( core_vertex const& v )
{
  return v.latency > 0 ? v.latency : 1u;
}

enum class schedule_violation_kind
{
  slot_range,
  resource,
  negative_delay,
  pinned,
  combinational_loop
};

struct schedule_violation
{
  schedule_violation_kind kind;
  std::string message;
};

std::string_view schedule_violation_name( schedule_violation_kind k );

/*! \brief Checks slot ranges, the per-class resource limit, D >= 0 on every arc,
    input pinning and the absence of zero-register loops between units. */
std::vector<schedule_violation> verify_schedule( core_graph const& cg, schedule const& s );

class schedule_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Resource-constrained list scheduling.

  Time steps are filled in order.  At each step the ready vertices (all
  zero-delay producers finished) are visited by decreasing longest
  zero-delay path to a sink, ties by vertex index, and placed when their unit
  is free for max(P, 1) slots and every arc to an already placed vertex keeps
  D >= 0.  Without a hint, N starts at the largest class size and grows until
  the pass succeeds.
*/
schedule list_schedule( core_graph const& cg, std::optional<uint32_t> folding_factor_hint = std::nullopt );

/*! \brief Upper bound on N tried by `list_schedule`. */
uint32_t folding_factor_cap( core_graph const& cg );

nlohmann::json schedule_to_json( core_graph const& cg, schedule const& s );

/*! \brief Reads the slots of a schedule report for the vertices of `cg`.

  The `arcs` entry is ignored.  Throws `schedule_error` when N is missing or
  zero, or a vertex has no slot or an unknown name appears.
*/
schedule schedule_from_json( core_graph const& cg, nlohmann::json const& j );

} // namespace dfgfold
