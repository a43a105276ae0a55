#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qopf {

enum class BusKind { generator, load };

/// One node. `id` is 0-based internally; case files count from 1.
struct BusRecord {
  int id = 0;
  BusKind kind = BusKind::load;
  double p_demand = 0.0;
  double q_demand = 0.0;
  double v_min = 0.9;
  double v_max = 1.1;
};

/// Series-only line between two nodes. `i_max` bounds v^H M_i v directly.
struct BranchRecord {
  int from = 0;
  int to = 0;
  double g_series = 0.0;
  double b_series = 0.0;
  double i_max = 0.0;
};

/// Dispatchable unit with a linear cost, all quantities per unit.
struct GeneratorRecord {
  int bus = 0;
  double cost = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
};

struct NetworkCase {
  std::string name;
  std::vector<BusRecord> buses;
  std::vector<BranchRecord> branches;
  std::vector<GeneratorRecord> generators;
  int reference_bus = 0;

  std::size_t size() const { return buses.size(); }
  std::vector<int> generator_buses() const;
  std::vector<int> load_buses() const;
  /// Generator hosted at `bus`, if any.
  const GeneratorRecord* generator_at(int bus) const;
};

/// Throws ValidationError on the first broken invariant.
void validate(const NetworkCase& c);

/// Parse the native BUS/BRANCH/GEN/COST text format (see README).
NetworkCase parse_case(const std::string& text, std::string name = "case");
NetworkCase load_case(const std::string& path);
std::string write_case(const NetworkCase& c);

struct MatpowerImportOptions {
  /// Keep only the linear term of polynomial costs instead of rejecting them.
  bool drop_quadratic_cost = false;
};

/// Import the `mpc.baseMVA`, `mpc.bus`, `mpc.gen`, `mpc.branch`, `mpc.gencost`
/// tables of a MATPOWER case file. Shunts, line charging and tap ratios are
/// dropped; parallel branches are merged. Notes go to `warnings`.
NetworkCase import_matpower(const std::string& text, const MatpowerImportOptions& options,
                            std::vector<std::string>* warnings = nullptr,
                            std::string name = "case");

}  // namespace qopf
