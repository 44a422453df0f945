#pragma once

#include <filesystem>
#include <limits>
#include <string>

#include "otlab/density.hpp"
#include "otlab/kantorovich.hpp"
#include "otlab/measures.hpp"
#include "otlab/optimality.hpp"
#include "otlab/pde.hpp"
#include "otlab/selection.hpp"

namespace otlab {

/// Shortest round-trip decimal form of a double (what every serializer in
/// this library uses, so identical inputs give byte-identical outputs).
std::string format_double(double value);

// JSON, with fields emitted in a fixed order.
// measure: {"points": [[x,...],...], "weights": [w,...]}
// plan:    {"entries": [[i,j,mass],...]}
std::string to_json(const DiscreteMeasure& measure);
std::string to_json(const TransportPlan& plan);
// {"primal_value","dual_value","plan","h","k","iterations"}
std::string to_json(const SolveReport& report);
// {"ok","max_cycle","violation": [[i,j],...],"gain"} (violation/gain only
// when a cycle was found; pairs are measure indices)
std::string to_json(const MonotonicityReport& report,
                    const TransportPlan& plan);
// {"eps_schedule","plans"?,"limit_plan","stabilized","primary_value",
//  "secondary_value","is_graph","split_mass"}
std::string to_json(const SelectionReport& report, bool include_plans = true);
// {"origin","cell_size","nx","ny","values"} plus "outside" when finite.
std::string to_json(const GridField& field,
                    double outside = std::numeric_limits<double>::quiet_NaN());

DiscreteMeasure measure_from_json(const std::string& text);
TransportPlan plan_from_json(const std::string& text,
                             const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu);
GridField grid_from_json(const std::string& text);

// CSV; header row, one metadata row, then ny rows of nx values (row j = 0
// first).
std::string grid_to_csv(const GridField& field);
GridField grid_from_csv(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

DiscreteMeasure read_measure_file(const std::filesystem::path& path);
TransportPlan read_plan_file(const std::filesystem::path& path,
                             const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu);

}  // namespace otlab
