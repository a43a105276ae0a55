#include "qopf/case.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "qopf/errors.hpp"

namespace qopf {

std::vector<int> NetworkCase::generator_buses() const {
  std::vector<int> out;
  for (const auto& b : buses)
    if (b.kind == BusKind::generator) out.push_back(b.id);
  return out;
}

std::vector<int> NetworkCase::load_buses() const {
  std::vector<int> out;
  for (const auto& b : buses)
    if (b.kind == BusKind::load) out.push_back(b.id);
  return out;
}

const GeneratorRecord* NetworkCase::generator_at(int bus) const {
  for (const auto& g : generators)
    if (g.bus == bus) return &g;
  return nullptr;
}

void validate(const NetworkCase& c) {
  const int n = static_cast<int>(c.buses.size());
  if (n == 0) throw ValidationError("case has no buses");
  for (int i = 0; i < n; ++i) {
    const BusRecord& b = c.buses[i];
    if (b.id != i) throw ValidationError("bus ids must be contiguous, expected " + std::to_string(i + 1));
    if (!(b.v_min > 0.0)) throw ValidationError("bus " + std::to_string(i + 1) + ": v_min must be positive");
    if (!(b.v_min <= b.v_max)) throw ValidationError("bus " + std::to_string(i + 1) + ": v_min > v_max");
    if (!std::isfinite(b.p_demand) || !std::isfinite(b.q_demand))
      throw ValidationError("bus " + std::to_string(i + 1) + ": non-finite demand");
  }
  if (c.reference_bus < 0 || c.reference_bus >= n) throw ValidationError("reference bus out of range");

  std::set<std::pair<int, int>> edges;
  for (const auto& br : c.branches) {
    if (br.from < 0 || br.from >= n || br.to < 0 || br.to >= n)
      throw ValidationError("branch endpoint out of range");
    if (br.from == br.to) throw ValidationError("branch " + std::to_string(br.from + 1) + "-" +
                                                std::to_string(br.to + 1) + " is a self-loop");
    if (!(br.i_max > 0.0))
      throw ValidationError("branch " + std::to_string(br.from + 1) + "-" + std::to_string(br.to + 1) +
                            ": i_max must be positive");
    if (!edges.insert({std::min(br.from, br.to), std::max(br.from, br.to)}).second)
      throw ValidationError("duplicate branch " + std::to_string(br.from + 1) + "-" + std::to_string(br.to + 1));
  }

  std::vector<int> gens_at(n, 0);
  for (const auto& g : c.generators) {
    if (g.bus < 0 || g.bus >= n) throw ValidationError("generator bus out of range");
    if (++gens_at[g.bus] > 1)
      throw ValidationError("bus " + std::to_string(g.bus + 1) + " hosts more than one generator");
    if (c.buses[g.bus].kind != BusKind::generator)
      throw ValidationError("generator at load bus " + std::to_string(g.bus + 1));
    if (!(g.p_min <= g.p_max) || !(g.q_min <= g.q_max))
      throw ValidationError("generator at bus " + std::to_string(g.bus + 1) + ": inverted limits");
  }
  for (const auto& b : c.buses)
    if (b.kind == BusKind::generator && gens_at[b.id] == 0)
      throw ValidationError("generator bus " + std::to_string(b.id + 1) + " has no GEN row");

  // connectivity
  std::vector<std::vector<int>> adj(n);
  for (const auto& br : c.branches) {
    adj[br.from].push_back(br.to);
    adj[br.to].push_back(br.from);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int w : adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw ValidationError("grid is disconnected: bus " + std::to_string(i + 1) + " unreachable");
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, int line) {
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("expected a number, got '" + tok + "'", line);
  return v;
}

int to_index(const std::string& tok, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 1)
    throw ParseError("expected a 1-based index, got '" + tok + "'", line);
  return v - 1;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void expect_columns(const std::vector<std::string>& cols, std::size_t lo, std::size_t hi, int line,
                    const char* section) {
  if (cols.size() < lo || cols.size() > hi)
    throw ParseError(std::string(section) + " row needs " + std::to_string(lo) +
                         (lo == hi ? "" : "-" + std::to_string(hi)) + " columns, got " +
                         std::to_string(cols.size()),
                     line);
}

}  // namespace

NetworkCase parse_case(const std::string& text, std::string name) {
  NetworkCase out;
  out.name = std::move(name);
  enum class Section { none, bus, branch, gen, cost } section = Section::none;

  std::map<int, BusRecord> buses;
  std::map<int, GeneratorRecord> gens;
  std::map<int, double> costs;
  std::optional<int> reference;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find_first_of("#%");
    if (hash != std::string::npos) raw.resize(hash);
    auto cols = split_ws(raw);
    if (cols.empty()) continue;

    const std::string& head = cols[0];
    if (head == "BUS" && cols.size() == 1) { section = Section::bus; continue; }
    if (head == "BRANCH" && cols.size() == 1) { section = Section::branch; continue; }
    if (head == "GEN" && cols.size() == 1) { section = Section::gen; continue; }
    if (head == "COST" && cols.size() == 1) { section = Section::cost; continue; }
    if (head == "NAME") {
      if (cols.size() != 2) throw ParseError("NAME takes one token", lineno);
      out.name = cols[1];
      continue;
    }
    if (head == "REFERENCE") {
      if (cols.size() != 2) throw ParseError("REFERENCE takes one bus index", lineno);
      reference = to_index(cols[1], lineno);
      continue;
    }

    switch (section) {
      case Section::none:
        throw ParseError("data before any BUS/BRANCH/GEN/COST header", lineno);
      case Section::bus: {
        expect_columns(cols, 6, 6, lineno, "BUS");
        BusRecord b;
        b.id = to_index(cols[0], lineno);
        if (cols[1] == "gen") b.kind = BusKind::generator;
        else if (cols[1] == "load") b.kind = BusKind::load;
        else throw ParseError("bus kind must be 'gen' or 'load', got '" + cols[1] + "'", lineno);
        b.p_demand = to_double(cols[2], lineno);
        b.q_demand = to_double(cols[3], lineno);
        b.v_min = to_double(cols[4], lineno);
        b.v_max = to_double(cols[5], lineno);
        if (!buses.emplace(b.id, b).second) throw ParseError("duplicate bus " + cols[0], lineno);
        break;
      }
      case Section::branch: {
        expect_columns(cols, 5, 5, lineno, "BRANCH");
        BranchRecord br;
        br.from = to_index(cols[0], lineno);
        br.to = to_index(cols[1], lineno);
        br.g_series = to_double(cols[2], lineno);
        br.b_series = to_double(cols[3], lineno);
        br.i_max = to_double(cols[4], lineno);
        out.branches.push_back(br);
        break;
      }
      case Section::gen: {
        expect_columns(cols, 5, 5, lineno, "GEN");
        GeneratorRecord g;
        g.bus = to_index(cols[0], lineno);
        g.p_min = to_double(cols[1], lineno);
        g.p_max = to_double(cols[2], lineno);
        g.q_min = to_double(cols[3], lineno);
        g.q_max = to_double(cols[4], lineno);
        if (!gens.emplace(g.bus, g).second)
          throw ParseError("bus " + cols[0] + " hosts more than one generator", lineno);
        break;
      }
      case Section::cost: {
        expect_columns(cols, 2, 3, lineno, "COST");
        const int bus = to_index(cols[0], lineno);
        const double linear = to_double(cols[1], lineno);
        if (cols.size() == 3 && to_double(cols[2], lineno) != 0.0)
          throw ParseError("quadratic generator cost is not supported; only linear costs c*p_g", lineno);
        if (!costs.emplace(bus, linear).second) throw ParseError("duplicate COST row for bus " + cols[0], lineno);
        break;
      }
    }
  }

  const int n = static_cast<int>(buses.size());
  for (int i = 0; i < n; ++i) {
    auto it = buses.find(i);
    if (it == buses.end()) throw ValidationError("bus ids must be 1.." + std::to_string(n) + "; missing " +
                                                 std::to_string(i + 1));
    out.buses.push_back(it->second);
  }
  for (auto& [bus, g] : gens) {
    auto c = costs.find(bus);
    if (c == costs.end()) throw ValidationError("generator at bus " + std::to_string(bus + 1) + " has no COST row");
    g.cost = c->second;
    out.generators.push_back(g);
  }
  for (const auto& [bus, _] : costs)
    if (!gens.count(bus)) throw ValidationError("COST row for bus " + std::to_string(bus + 1) + " without generator");
  out.reference_bus = reference.value_or(0);
  validate(out);
  return out;
}

NetworkCase load_case(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open case file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_case(ss.str(), stem);
}

std::string write_case(const NetworkCase& c) {
  std::ostringstream os;
  os << "NAME " << (c.name.empty() ? "case" : c.name) << "\n";
  if (c.reference_bus != 0) os << "REFERENCE " << c.reference_bus + 1 << "\n";
  os << "BUS\n# id kind p_demand q_demand v_min v_max\n";
  for (const auto& b : c.buses)
    os << b.id + 1 << ' ' << (b.kind == BusKind::generator ? "gen" : "load") << ' ' << format_double(b.p_demand)
       << ' ' << format_double(b.q_demand) << ' ' << format_double(b.v_min) << ' ' << format_double(b.v_max)
       << "\n";
  os << "BRANCH\n# from to g_series b_series i_max\n";
  for (const auto& br : c.branches)
    os << br.from + 1 << ' ' << br.to + 1 << ' ' << format_double(br.g_series) << ' '
       << format_double(br.b_series) << ' ' << format_double(br.i_max) << "\n";
  os << "GEN\n# bus p_min p_max q_min q_max\n";
  for (const auto& g : c.generators)
    os << g.bus + 1 << ' ' << format_double(g.p_min) << ' ' << format_double(g.p_max) << ' '
       << format_double(g.q_min) << ' ' << format_double(g.q_max) << "\n";
  os << "COST\n# bus linear_cost\n";
  for (const auto& g : c.generators) os << g.bus + 1 << ' ' << format_double(g.cost) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// MATPOWER import

namespace {

using Table = std::vector<std::vector<double>>;

/// Extract the numeric rows of `mpc.<field> = [ ... ];`.
std::optional<Table> matpower_table(const std::string& text, const std::string& field, int* first_line) {
  const std::string key = "mpc." + field;
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    const std::size_t after = pos + key.size();
    if (after < text.size() && (std::isalnum(static_cast<unsigned char>(text[after])) || text[after] == '_')) {
      pos = after;
      continue;
    }
    break;
  }
  if (pos == std::string::npos) return std::nullopt;
  const std::size_t open = text.find('[', pos);
  const std::size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw ParseError("unterminated table mpc." + field, 0);
  *first_line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + open, '\n'));

  Table rows;
  std::vector<double> row;
  int line = *first_line;
  std::string body = text.substr(open + 1, close - open - 1);
  std::size_t i = 0;
  auto flush = [&] {
    if (!row.empty()) rows.push_back(std::move(row));
    row.clear();
  };
  while (i < body.size()) {
    const char ch = body[i];
    if (ch == '%') {
      while (i < body.size() && body[i] != '\n') ++i;
      continue;
    }
    if (ch == '\n') { ++line; flush(); ++i; continue; }
    if (ch == ';') { flush(); ++i; continue; }
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') { ++i; continue; }
    std::size_t j = i;
    while (j < body.size() && !std::isspace(static_cast<unsigned char>(body[j])) && body[j] != ';' &&
           body[j] != ',' && body[j] != '%')
      ++j;
    const std::string tok = body.substr(i, j - i);
    if (tok == "Inf" || tok == "inf") row.push_back(INFINITY);
    else if (tok == "-Inf" || tok == "-inf") row.push_back(-INFINITY);
    else row.push_back(to_double(tok, line));
    i = j;
  }
  flush();
  return rows;
}

double matpower_scalar(const std::string& text, const std::string& field, double fallback) {
  const std::string key = "mpc." + field;
  const auto pos = text.find(key);
  if (pos == std::string::npos) return fallback;
  const auto eq = text.find('=', pos);
  const auto semi = text.find(';', eq);
  std::string tok = text.substr(eq + 1, semi - eq - 1);
  tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char ch) { return std::isspace(ch); }), tok.end());
  return to_double(tok, 0);
}

}  // namespace

NetworkCase import_matpower(const std::string& text, const MatpowerImportOptions& options,
                            std::vector<std::string>* warnings, std::string name) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  int line_bus = 0, line_gen = 0, line_branch = 0, line_cost = 0;
  const double base = matpower_scalar(text, "baseMVA", 100.0);
  auto bus_t = matpower_table(text, "bus", &line_bus);
  auto gen_t = matpower_table(text, "gen", &line_gen);
  auto branch_t = matpower_table(text, "branch", &line_branch);
  auto cost_t = matpower_table(text, "gencost", &line_cost);
  if (!bus_t || !gen_t || !branch_t) throw ParseError("MATPOWER case needs mpc.bus, mpc.gen and mpc.branch", 0);
  if (!cost_t) throw ParseError("MATPOWER case needs mpc.gencost for the OPF objective", 0);

  // external id -> internal index, reference (type 3) bus first
  std::vector<const std::vector<double>*> order;
  for (const auto& r : *bus_t) {
    if (r.size() < 13) throw ParseError("mpc.bus rows need 13 columns", line_bus);
    if (r[1] == 4) throw ValidationError("isolated bus " + std::to_string(static_cast<long>(r[0])) + " in case");
    if (r[1] == 3) order.insert(order.begin(), &r);
    else order.push_back(&r);
  }
  std::map<long, int> index;
  NetworkCase out;
  out.name = std::move(name);
  bool shunts = false;
  for (const auto* r : order) {
    const long ext = static_cast<long>((*r)[0]);
    const int id = static_cast<int>(out.buses.size());
    if (!index.emplace(ext, id).second) throw ValidationError("duplicate MATPOWER bus " + std::to_string(ext));
    BusRecord b;
    b.id = id;
    b.p_demand = (*r)[2] / base;
    b.q_demand = (*r)[3] / base;
    b.v_max = (*r)[11];
    b.v_min = (*r)[12];
    if ((*r)[4] != 0.0 || (*r)[5] != 0.0) shunts = true;
    out.buses.push_back(b);
  }
  if (shunts) warn("bus shunts (Gs, Bs) are not modeled and were dropped");

  if (gen_t->size() != cost_t->size()) throw ParseError("mpc.gencost must have one row per generator", line_cost);
  for (std::size_t k = 0; k < gen_t->size(); ++k) {
    const auto& r = (*gen_t)[k];
    const auto& cr = (*cost_t)[k];
    if (r.size() < 10) throw ParseError("mpc.gen rows need at least 10 columns", line_gen);
    if (r[7] <= 0) {
      warn("out-of-service generator at bus " + std::to_string(static_cast<long>(r[0])) + " skipped");
      continue;
    }
    auto it = index.find(static_cast<long>(r[0]));
    if (it == index.end()) throw ValidationError("generator at unknown bus " + std::to_string(static_cast<long>(r[0])));
    if (cr.size() < 4 || cr[0] != 2) throw ParseError("only polynomial (model 2) generator costs are supported", line_cost);
    const int ncoef = static_cast<int>(cr[3]);
    if (ncoef < 1 || static_cast<int>(cr.size()) < 4 + ncoef) throw ParseError("malformed gencost row", line_cost);
    // coefficients are listed highest order first: c_{n-1} ... c_1 c_0
    std::vector<double> coef(cr.begin() + 4, cr.begin() + 4 + ncoef);
    std::reverse(coef.begin(), coef.end());
    for (int order_k = 2; order_k < ncoef; ++order_k) {
      if (coef[order_k] == 0.0) continue;
      if (!options.drop_quadratic_cost)
        throw ParseError("generator at bus " + std::to_string(static_cast<long>(r[0])) +
                             " has a nonlinear cost; only linear costs are supported "
                             "(import with drop_quadratic_cost to keep the linear term)",
                         line_cost);
      warn("nonlinear cost terms of generator at bus " + std::to_string(static_cast<long>(r[0])) + " dropped");
      break;
    }
    GeneratorRecord g;
    g.bus = it->second;
    g.cost = (ncoef >= 2 ? coef[1] : 0.0) * base;
    g.q_max = r[3] / base;
    g.q_min = r[4] / base;
    g.p_max = r[8] / base;
    g.p_min = r[9] / base;
    out.buses[g.bus].kind = BusKind::generator;
    out.generators.push_back(g);
  }
  std::sort(out.generators.begin(), out.generators.end(),
            [](const GeneratorRecord& a, const GeneratorRecord& b) { return a.bus < b.bus; });

  struct Merged {
    std::complex<double> y;
    double rate;
    bool unlimited;
  };
  std::map<std::pair<int, int>, Merged> lines;
  std::vector<std::pair<int, int>> line_order;
  bool charging = false, taps = false;
  for (const auto& r : *branch_t) {
    if (r.size() < 11) throw ParseError("mpc.branch rows need at least 11 columns", line_branch);
    if (r[10] <= 0) continue;
    auto f = index.find(static_cast<long>(r[0]));
    auto t = index.find(static_cast<long>(r[1]));
    if (f == index.end() || t == index.end()) throw ValidationError("branch references unknown bus");
    const std::complex<double> z(r[2], r[3]);
    if (z == 0.0) throw ValidationError("branch with zero impedance");
    if (r[4] != 0.0) charging = true;
    if ((r[8] != 0.0 && r[8] != 1.0) || r[9] != 0.0) taps = true;
    const auto key = std::make_pair(std::min(f->second, t->second), std::max(f->second, t->second));
    const std::complex<double> y = 1.0 / z;
    const bool unlimited = r[5] <= 0.0;
    auto [it, fresh] = lines.try_emplace(key, Merged{y, r[5] / base, unlimited});
    if (fresh) {
      line_order.push_back(key);
    } else {
      warn("parallel branches " + std::to_string(static_cast<long>(r[0])) + "-" +
           std::to_string(static_cast<long>(r[1])) + " merged");
      it->second.y += y;
      it->second.rate += r[5] / base;
      it->second.unlimited = it->second.unlimited || unlimited;
    }
  }
  if (charging) warn("line charging susceptance is not modeled and was dropped");
  if (taps) warn("transformer tap ratios and phase shifts are not modeled and were dropped");
  for (const auto& key : line_order) {
    const Merged& m = lines.at(key);
    BranchRecord br;
    br.from = key.first;
    br.to = key.second;
    br.g_series = m.y.real();
    br.b_series = m.y.imag();
    // v^H M_i v = |y| |v_n - v_m|^2 <= s^2/|y|  is equivalent to |i|^2 <= s^2
    const double s = m.unlimited ? 1.0e3 : m.rate;
    br.i_max = s * s / std::abs(m.y);
    out.branches.push_back(br);
  }
  validate(out);
  return out;
}

}  // namespace qopf
