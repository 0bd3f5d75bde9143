/* Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure. */

#include "test_util.hpp"

#include <dfgfold/cost.hpp>
#include <dfgfold/explore.hpp>
#include <dfgfold/fold.hpp>
#include <dfgfold/simulate.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <random>

#include <fmt/format.h>

using namespace dfgfold;
using namespace dfgfold::test;

namespace
{

struct outcome
{
  bool pass;
  std::string detail;
};

std::vector<std::string> const benchmarks{ "fir", "iir", "pct", "tpid" };

std::vector<bench_config> table_configs()
{
  std::vector<bench_config> out;
  for ( auto& bc : shipped_configs() )
  {
    if ( std::find( benchmarks.begin(), benchmarks.end(), bc.bench ) != benchmarks.end() )
      out.push_back( std::move( bc ) );
  }
  return out;
}

folding_config single_class( dataflow_graph const& g, std::string const& pattern, uint32_t count )
{
  return instantiate( g, config_request{ "c", { class_request{ pattern, count } } } );
}

outcome equivalence_suite()
{
  auto start = std::chrono::steady_clock::now();
  auto configs = table_configs();
  uint32_t passed = 0;
  std::string failures;
  for ( auto const& bc : configs )
  {
    auto folded = fold_with_schedule( bc.graph, bc.config ).design;
    bool ok = true;
    for ( auto const& stim : { random_stimuli( bc.graph, 1000, 1, 1.0 ), impulse_stimuli( bc.graph, 1000 ), step_stimuli( bc.graph, 1000 ) } )
      ok = check_equivalence( bc.graph, folded, stim, 1000 ).pass && ok;
    if ( ok )
      ++passed;
    else
      failures += " " + bc.name;
  }
  double seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
  bool pass = configs.size() >= 25 && passed == configs.size() && seconds < 60.0;
  return { pass, fmt::format( "{}/{} configs bit-exact on 1000 random + impulse + step samples in {:.1f} s{}", passed, configs.size(), seconds,
                              failures.empty() ? "" : "; failing:" + failures ) };
}

outcome iir_multiplier_reduction()
{
  auto g = gen_iir();
  auto before = estimate_cost( g ).mult_units;
  auto after = estimate_cost( fold_with_schedule( g, single_class( g, "prod", 4 ) ).design ).mult_units;
  return { before == 4 && after == 1, fmt::format( "mult_units {} -> {} ({:.0f}% reduction)", before, after, 100.0 * ( before - after ) / before ) };
}

outcome fir_multiplier_reduction()
{
  auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
  auto before = estimate_cost( g ).mult_units;
  auto after = estimate_cost( fold_with_schedule( g, single_class( g, "prod", 15 ) ).design ).mult_units;
  double reduction = 100.0 * ( before - after ) / before;
  return { before == 16 && after == 2 && reduction >= 87.0, fmt::format( "mult_units {} -> {} ({:.1f}% reduction)", before, after, reduction ) };
}

outcome folding_equation_soundness( std::vector<std::vector<exploration_row>> const& sweeps )
{
  uint64_t arcs = 0, negative = 0, reported = 0;
  for ( auto const& bc : table_configs() )
  {
    auto p = prepare_fold( bc.graph, bc.config );
    auto s = list_schedule( p.cores );
    for ( auto const& a : p.cores.arcs )
    {
      ++arcs;
      negative += folding_delay( a.delay, a.latency, s.slots[a.src], s.slots[a.dst], s.folding_factor ) < 0 ? 1 : 0;
    }
  }
  uint64_t rows = 0;
  for ( auto const& sweep : sweeps )
  {
    for ( auto const& r : sweep )
    {
      ++rows;
      reported += r.negative_arcs;
      reported += r.failure.empty() ? 0 : 1;
    }
  }
  return { arcs > 0 && negative == 0 && reported == 0,
           fmt::format( "{} arcs recomputed, {} with D < 0; {} sweep rows report {} violations", arcs, negative, rows, reported ) };
}

outcome cost_decomposition()
{
  uint32_t designs = 0, identity = 0, with_precondition = 0, agree = 0;
  for ( auto const& bc : table_configs() )
  {
    ++designs;
    auto original = estimate_cost( bc.graph );
    auto folded = estimate_cost( fold_with_schedule( bc.graph, bc.config ).design );
    auto const& p = *folded.breakdown;
    identity += p.core + p.remain + p.overhead == folded.lut_units ? 1 : 0;
    auto b = folding_benefit( original, folded );
    bool pre = folded.folding_factor * p.core + p.remain == original.lut_units;
    if ( pre && b.precondition )
    {
      ++with_precondition;
      agree += b.beneficial == b.overhead_below_saving && b.agree ? 1 : 0;
    }
  }
  return { identity == designs && agree == with_precondition && with_precondition > 0,
           fmt::format( "identity holds on {}/{} designs; benefit tests agree on {}/{} designs meeting the precondition", identity, designs,
                        agree, with_precondition ) };
}

outcome scheduler_optimality()
{
  std::mt19937 rng( 6 );
  uint32_t agree = 0, cases = 100;
  for ( uint32_t k = 0; k < cases; ++k )
  {
    auto cg = random_core_graph( rng, std::uniform_int_distribution<uint32_t>( 2, 6 )( rng ) );
    try
    {
      auto s = list_schedule( cg );
      if ( verify_schedule( cg, s ).empty() && exhaustive_minimum( cg, s.folding_factor ) == s.folding_factor )
        ++agree;
    }
    catch ( schedule_error const& )
    {
    }
  }
  return { agree == cases, fmt::format( "{}/{} random core graphs scheduled at the exhaustive minimum", agree, cases ) };
}

outcome matcher_exactness()
{
  std::mt19937 rng( 2024 );
  uint32_t compared = 0, agree = 0;
  for ( int trial = 0; compared < 100 && trial < 1000; ++trial )
  {
    auto g = random_graph( rng, std::uniform_int_distribution<uint32_t>( 5, 9 )( rng ) );
    std::vector<uint32_t> ops;
    for ( uint32_t n = 0; n < g.size(); ++n )
    {
      if ( g.at( n ).kind != node_kind::input && g.at( n ).kind != node_kind::output )
        ops.push_back( n );
    }
    std::shuffle( ops.begin(), ops.end(), rng );
    ops.resize( std::uniform_int_distribution<size_t>( 1, std::min<size_t>( 3, ops.size() ) )( rng ) );
    std::sort( ops.begin(), ops.end() );
    auto p = induced_pattern( g, ops );
    if ( !p || g.size() > 12 )
      continue;
    ++compared;
    agree += embedding_set( match_pattern( g, *p ) ) == brute_force_embeddings( g, *p ) ? 1 : 0;
  }

  uint32_t requests = 0, achieved = 0;
  for ( auto const& b : bench_names() )
  {
    auto g = *gen_bench( b );
    for ( auto const& req : reference_configs( b ) )
    {
      ++requests;
      try
      {
        auto cfg = instantiate( g, req );
        bool ok = check_config( g, cfg ).empty();
        for ( size_t c = 0; c < req.classes.size(); ++c )
          ok = ok && cfg.classes[c].instances.size() == req.classes[c].count;
        achieved += ok ? 1 : 0;
      }
      catch ( cover_error const& )
      {
      }
    }
  }
  auto fir = gen_fir( 16, default_fir_coefficients( 16 ) );
  auto tpid = gen_tpid();
  bool fir14 = single_class( fir, "delay_prod_add", 14 ).classes[0].instances.size() == 14;
  bool pid3 = single_class( tpid, "pid", 3 ).classes[0].instances.size() == 3;
  return { compared == 100 && agree == 100 && achieved == requests && fir14 && pid3,
           fmt::format( "{}/{} random graphs match brute force; {}/{} table instance counts achieved (FIR 14 delay-prod-add: {}, TPID 3 pid: {})",
                        agree, compared, achieved, requests, fir14 ? "yes" : "no", pid3 ? "yes" : "no" ) };
}

outcome pareto_correctness( std::vector<exploration_row> const& fir_rows )
{
  std::mt19937 rng( 8 );
  uint32_t agree = 0;
  for ( int k = 0; k < 100; ++k )
  {
    auto n = std::uniform_int_distribution<int>( 0, 1000 )( rng );
    std::vector<exploration_row> rows( n );
    for ( int i = 0; i < n; ++i )
    {
      rows[i].name = fmt::format( "r{}", i );
      rows[i].notation = rows[i].name;
      rows[i].cost.lut_units = std::uniform_int_distribution<uint64_t>( 0, 60 )( rng );
      rows[i].latency_proxy = std::uniform_int_distribution<int>( 0, 60 )( rng ) * 0.5;
      rows[i].equivalent = std::uniform_int_distribution<int>( 0, 9 )( rng ) != 0;
    }
    agree += coordinates( pareto( rows ) ) == brute_force_front( rows ) ? 1 : 0;
  }
  auto front = pareto( fir_rows );
  bool monotone = true;
  for ( size_t i = 1; i < front.size(); ++i )
    monotone = monotone && front[i].latency_proxy > front[i - 1].latency_proxy && front[i].cost.lut_units < front[i - 1].cost.lut_units;
  return { agree == 100 && !front.empty() && monotone,
           fmt::format( "{}/100 random row sets match brute force; FIR front has {} point(s), monotone: {}", agree, front.size(),
                        monotone ? "yes" : "no" ) };
}

outcome structural_invariants()
{
  uint32_t designs = 0, counters_ok = 0, classes = 0, mux_ok = 0, interleave_ok = 0;
  for ( auto const& bc : table_configs() )
  {
    ++designs;
    auto r = fold_with_schedule( bc.graph, bc.config );
    auto const& d = r.design;
    auto n = r.sched.folding_factor;
    counters_ok += d.graph.nodes_of_kind( node_kind::counter ).size() == 1 ? 1 : 0;
    for ( uint32_t c = 0; c < r.problem.config.classes.size(); ++c )
    {
      ++classes;
      mux_ok += nodes_in_class( d, node_kind::mux, c ).size() == multi_source_inputs( r.problem, r.sched, c ) ? 1 : 0;

      auto const& t = r.problem.config.classes[c].pattern.templ;
      uint64_t want = 0, have = 0;
      for ( auto x : t.nodes_of_kind( node_kind::delay ) )
      {
        want += n;
        auto const& id = t.at( x ).id;
        for ( uint32_t k = 0; k < n; ++k )
          have += d.graph.find( fmt::format( "u{}_{}", c, k == 0 ? id : fmt::format( "{}_r{}", id, k ) ) ) ? 1 : 0;
        have += d.graph.find( fmt::format( "u{}_{}_r{}", c, id, std::max( n, 1u ) ) ) ? 1 : 0;
      }
      for ( auto const& e : t.edges() )
      {
        if ( e.delay == 0 || t.at( e.src ).kind == node_kind::const_input )
          continue;
        want += uint64_t{ n } * e.delay;
        auto dst = d.graph.find( fmt::format( "u{}_{}", c, t.at( e.dst ).id ) );
        auto ei = dst ? d.graph.driver( *dst, e.dst_port ) : std::nullopt;
        have += ei ? d.graph.edges()[*ei].delay : 0;
      }
      interleave_ok += want == have ? 1 : 0;
    }
  }
  return { counters_ok == designs && mux_ok == classes && interleave_ok == classes,
           fmt::format( "one counter in {}/{} designs; mux count matches multi-source inputs in {}/{} classes; in-core registers scaled by N in "
                        "{}/{} classes",
                        counters_ok, designs, mux_ok, classes, interleave_ok, classes ) };
}

} // namespace

int main()
{
  std::vector<std::vector<exploration_row>> sweeps;
  std::vector<exploration_row> fir_rows;
  for ( auto const& b : benchmarks )
  {
    std::vector<named_config> configs;
    for ( auto const& bc : table_configs() )
    {
      if ( bc.bench == b )
        configs.push_back( { bc.name, bc.config } );
    }
    sweeps.push_back( explore( *gen_bench( b ), configs ) );
    if ( b == "fir" )
      fir_rows = sweeps.back();
  }

  std::vector<std::pair<std::string, std::function<outcome()>>> criteria{
      { "equivalence suite", equivalence_suite },
      { "IIR multiplier reduction", iir_multiplier_reduction },
      { "FIR multiplier reduction", fir_multiplier_reduction },
      { "folding-equation soundness", [&] { return folding_equation_soundness( sweeps ); } },
      { "cost decomposition", cost_decomposition },
      { "scheduler optimality", scheduler_optimality },
      { "pattern-matcher exactness", matcher_exactness },
      { "Pareto correctness", [&] { return pareto_correctness( fir_rows ); } },
      { "structural folding invariants", structural_invariants },
  };

  int failed = 0;
  for ( size_t i = 0; i < criteria.size(); ++i )
  {
    outcome o;
    try
    {
      o = criteria[i].second();
    }
    catch ( std::exception const& e )
    {
      o = { false, fmt::format( "threw: {}", e.what() ) };
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format( "criterion {} {}: {} - {}\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail );
  }
  std::cout << fmt::format( "{}/{} criteria passed\n", criteria.size() - failed, criteria.size() );
  return failed == 0 ? 0 : 1;
}
