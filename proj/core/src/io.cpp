#include "otlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace otlab {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

ordered_json parse(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw IoError("bad_json", "input is not valid JSON");
  }
  return j;
}

ordered_json measure_node(const DiscreteMeasure& m) {
  ordered_json j;
  j["points"] = m.points();
  j["weights"] = m.weights();
  return j;
}

ordered_json plan_node(const TransportPlan& plan) {
  ordered_json entries = ordered_json::array();
  for (const PlanEntry& e : plan.entries()) {
    entries.push_back(ordered_json::array({e.source, e.target, e.mass}));
  }
  ordered_json j;
  j["entries"] = std::move(entries);
  return j;
}

ordered_json grid_node(const GridField& field, double outside) {
  const GridSpec& spec = field.spec();
  ordered_json j;
  j["origin"] = spec.origin;
  j["cell_size"] = spec.cell_size;
  j["nx"] = spec.nx;
  j["ny"] = spec.ny;
  j["values"] = field.values();
  if (std::isfinite(outside)) j["outside"] = outside;
  return j;
}

}  // namespace

std::string to_json(const DiscreteMeasure& measure) {
  return measure_node(measure).dump();
}

std::string to_json(const TransportPlan& plan) { return plan_node(plan).dump(); }

std::string to_json(const SolveReport& report) {
  ordered_json j;
  j["primal_value"] = report.primal_value;
  j["dual_value"] = report.dual_value;
  j["plan"] = plan_node(report.plan);
  j["h"] = report.potentials.h;
  j["k"] = report.potentials.k;
  j["iterations"] = report.iterations;
  return j.dump();
}

std::string to_json(const MonotonicityReport& report,
                    const TransportPlan& plan) {
  ordered_json j;
  j["ok"] = report.ok;
  j["max_cycle"] = report.max_cycle_checked;
  if (report.violation) {
    ordered_json cycle = ordered_json::array();
    for (std::int32_t idx : report.violation->entry_indices) {
      const PlanEntry& e = plan.entries()[idx];
      cycle.push_back(ordered_json::array({e.source, e.target}));
    }
    j["violation"] = std::move(cycle);
    j["gain"] = report.violation->gain;
  }
  return j.dump();
}

std::string to_json(const SelectionReport& report, bool include_plans) {
  ordered_json j;
  j["eps_schedule"] = report.eps_schedule;
  if (include_plans) {
    ordered_json plans = ordered_json::array();
    for (const TransportPlan& p : report.plans) plans.push_back(plan_node(p));
    j["plans"] = std::move(plans);
  }
  j["limit_plan"] = plan_node(report.limit_plan);
  j["stabilized"] = report.stabilized;
  j["primary_value"] = report.primary_value;
  j["secondary_value"] = report.secondary_value;
  j["is_graph"] = report.graph;
  j["split_mass"] = report.split_mass;
  return j.dump();
}

std::string to_json(const GridField& field, double outside) {
  return grid_node(field, outside).dump();
}

DiscreteMeasure measure_from_json(const std::string& text) {
  const ordered_json j = parse(text);
  if (!j.is_object() || !j.contains("points") || !j.contains("weights")) {
    throw IoError("bad_schema", "measure JSON needs points and weights");
  }
  try {
    return DiscreteMeasure(j["points"].get<std::vector<Point>>(),
                           j["weights"].get<std::vector<double>>());
  } catch (const ordered_json::exception&) {
    throw IoError("bad_schema", "measure JSON has malformed arrays");
  }
}

TransportPlan plan_from_json(const std::string& text,
                             const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu) {
  const ordered_json j = parse(text);
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
    throw IoError("bad_schema", "plan JSON needs an entries array");
  }
  std::vector<PlanEntry> entries;
  for (const auto& row : j["entries"]) {
    if (!row.is_array() || row.size() != 3) {
      throw IoError("bad_schema", "plan entries are [i, j, mass] triples");
    }
    entries.push_back({row[0].get<std::int32_t>(), row[1].get<std::int32_t>(),
                       row[2].get<double>()});
  }
  return TransportPlan(mu, nu, std::move(entries));
}

GridField grid_from_json(const std::string& text) {
  const ordered_json j = parse(text);
  for (const char* key : {"origin", "cell_size", "nx", "ny", "values"}) {
    if (!j.contains(key)) {
      throw IoError("bad_schema", "grid JSON is missing a field");
    }
  }
  GridSpec spec;
  spec.origin = j["origin"].get<std::array<double, 2>>();
  spec.cell_size = j["cell_size"].get<double>();
  spec.nx = j["nx"].get<int>();
  spec.ny = j["ny"].get<int>();
  return GridField(spec, j["values"].get<std::vector<double>>());
}

std::string grid_to_csv(const GridField& field) {
  const GridSpec& spec = field.spec();
  std::string out = "origin_x,origin_y,cell_size,nx,ny\n";
  out += format_double(spec.origin[0]) + "," + format_double(spec.origin[1]) +
         "," + format_double(spec.cell_size) + "," + std::to_string(spec.nx) +
         "," + std::to_string(spec.ny) + "\n";
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      out += format_double(field.at(i, j));
      out += i + 1 < spec.nx ? ',' : '\n';
    }
  }
  return out;
}

GridField grid_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("bad_csv", "empty CSV");
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  if (!std::getline(in, line)) throw IoError("bad_csv", "missing metadata row");
  const auto meta = split(line);
  if (meta.size() != 5) throw IoError("bad_csv", "metadata row needs 5 fields");
  GridSpec spec;
  try {
    spec.origin = {std::stod(meta[0]), std::stod(meta[1])};
    spec.cell_size = std::stod(meta[2]);
    spec.nx = std::stoi(meta[3]);
    spec.ny = std::stoi(meta[4]);
  } catch (const std::exception&) {
    throw IoError("bad_csv", "metadata row is not numeric");
  }
  std::vector<double> values;
  values.reserve(spec.cell_count());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    for (const std::string& tok : split(line)) {
      try {
        values.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw IoError("bad_csv", "grid value is not numeric");
      }
    }
  }
  return GridField(spec, std::move(values));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("io", "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("io", "cannot write " + path.string());
  }
  out << content;
}

DiscreteMeasure read_measure_file(const std::filesystem::path& path) {
  return measure_from_json(read_text_file(path));
}

TransportPlan read_plan_file(const std::filesystem::path& path,
                             const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu) {
  return plan_from_json(read_text_file(path), mu, nu);
}

}  // namespace otlab
