#include "denjoy/io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "denjoy/errors.hpp"

namespace denjoy {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("bad number: " + s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number: " + s);
  }
}

}  // namespace

std::string print_mapdesc(const MapDescriptor& M) {
  std::ostringstream os;
  os << "mapdesc/1\n";
  os << "breakpoints";
  for (double b : M.breakpoints()) os << " " << format_double(b);
  os << "\n";
  for (const auto& p : M.pieces()) {
    if (p.kind == Piece::Kind::Flat)
      os << "piece FLAT " << format_double(p.value) << "\n";
    else
      os << "piece SMOOTH " << to_string(p.expr) << "\n";
  }
  os << "classes";
  for (int c : M.breakpoint_classes()) os << " " << c;
  os << "\n";
  os << "translation " << format_double(M.translation()) << "\n";
  return os.str();
}

MapDescriptor parse_mapdesc(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "mapdesc/1")
    throw ParseError("mapdesc: missing or unknown version header");
  std::vector<double> bps;
  std::vector<Piece> pieces;
  std::vector<int> classes;
  double translation = 0.0;
  bool have_translation = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string head;
    is >> head;
    if (head == "breakpoints") {
      double v;
      while (is >> v) bps.push_back(v);
    } else if (head == "piece") {
      std::string kind;
      is >> kind;
      if (kind == "FLAT") {
        std::string num;
        is >> num;
        pieces.push_back({Piece::Kind::Flat, to_double(num), nullptr});
      } else if (kind == "SMOOTH") {
        std::string rest;
        std::getline(is, rest);
        pieces.push_back({Piece::Kind::Smooth, 0.0, parse_expr(trim(rest))});
      } else {
        throw ParseError("mapdesc: unknown piece kind " + kind);
      }
    } else if (head == "classes") {
      int c;
      while (is >> c) classes.push_back(c);
    } else if (head == "translation") {
      std::string num;
      is >> num;
      translation = to_double(num);
      have_translation = true;
    } else {
      throw ParseError("mapdesc: unknown line head " + head);
    }
  }
  if (!have_translation) throw ParseError("mapdesc: missing trailing translation");
  if (classes.empty()) classes.assign(bps.size(), -1);
  return MapDescriptor(std::move(bps), std::move(pieces), std::move(classes), translation);
}

std::string print_stage_sidecar(const StageSidecar& s) {
  std::ostringstream os;
  os << "stage/1\n";
  os << "n " << s.n << "\n";
  os << "mode " << (s.anchored ? "anchored" : "main") << "\n";
  os << "eps " << format_double(s.eps) << "\n";
  os << "rho " << format_double(s.rho_star) << "\n";
  os << "rho_spec " << s.rho_spec << "\n";
  os << "a " << format_double(s.a) << "\n";
  os << "b " << format_double(s.b) << "\n";
  os << "r";
  for (long r : s.schedule) os << " " << r;
  os << "\n";
  os << "I " << format_double(s.I_lo) << " " << format_double(s.I_hi) << "\n";
  os << "flat_value " << format_double(s.flat_value) << "\n";
  os << "enc_iters " << s.enc_iters << "\n";
  os << "delta_used " << format_double(s.delta_used) << "\n";
  os << "sigma_used " << format_double(s.sigma_used) << "\n";
  os << "tau_total " << format_double(s.tau_total) << "\n";
  if (s.anchored) {
    os << "anchor_p " << format_double(s.anchor_p) << "\n";
    os << "anchor_k " << format_double(s.anchor_k) << "\n";
  }
  os << "map " << s.map_file << "\n";
  if (!s.prev_file.empty()) os << "prev " << s.prev_file << "\n";
  os << "config " << s.config_hash << "\n";
  return os.str();
}

StageSidecar parse_stage_sidecar(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "stage/1")
    throw ParseError("stage sidecar: missing or unknown version header");
  StageSidecar s;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string head;
    is >> head;
    if (head == "n") is >> s.n;
    else if (head == "mode") {
      std::string m;
      is >> m;
      s.anchored = (m == "anchored");
    } else if (head == "eps") { std::string v; is >> v; s.eps = to_double(v); }
    else if (head == "rho") { std::string v; is >> v; s.rho_star = to_double(v); }
    else if (head == "rho_spec") is >> s.rho_spec;
    else if (head == "a") { std::string v; is >> v; s.a = to_double(v); }
    else if (head == "b") { std::string v; is >> v; s.b = to_double(v); }
    else if (head == "r") {
      long r;
      while (is >> r) s.schedule.push_back(r);
    } else if (head == "I") {
      std::string v1, v2;
      is >> v1 >> v2;
      s.I_lo = to_double(v1);
      s.I_hi = to_double(v2);
    } else if (head == "flat_value") { std::string v; is >> v; s.flat_value = to_double(v); }
    else if (head == "enc_iters") is >> s.enc_iters;
    else if (head == "delta_used") { std::string v; is >> v; s.delta_used = to_double(v); }
    else if (head == "sigma_used") { std::string v; is >> v; s.sigma_used = to_double(v); }
    else if (head == "tau_total") { std::string v; is >> v; s.tau_total = to_double(v); }
    else if (head == "anchor_p") { std::string v; is >> v; s.anchor_p = to_double(v); }
    else if (head == "anchor_k") { std::string v; is >> v; s.anchor_k = to_double(v); }
    else if (head == "map") is >> s.map_file;
    else if (head == "prev") is >> s.prev_file;
    else if (head == "config") is >> s.config_hash;
    else throw ParseError("stage sidecar: unknown key " + head);
  }
  if (s.map_file.empty()) throw ParseError("stage sidecar: missing map reference");
  return s;
}

StageSidecar sidecar_from_state(const StageState& S, const std::string& map_file,
                                const std::string& prev_file, const std::string& config_hash) {
  StageSidecar s;
  s.n = S.n;
  s.anchored = S.anchored;
  s.eps = S.eps;
  s.rho_star = S.rho_star;
  s.rho_spec = "";
  s.a = S.U.lo;
  s.b = S.U.hi;
  s.schedule = S.schedule;
  s.I_lo = S.I.lo;
  s.I_hi = S.I.hi;
  s.flat_value = S.flat_value;
  s.enc_iters = S.enc_iters;
  s.delta_used = S.delta_used;
  s.sigma_used = S.sigma_used;
  s.tau_total = S.tau_total;
  if (S.anchored) {
    s.anchor_p = S.anchor.p;
    s.anchor_k = S.anchor.K_bound;
  }
  s.map_file = map_file;
  s.prev_file = prev_file;
  s.config_hash = config_hash;
  return s;
}

StageState state_from_sidecar(const StageSidecar& s, MapDescriptor M) {
  StageState S;
  S.n = s.n;
  S.M = std::move(M);
  S.U = {s.a, s.b};
  S.schedule = s.schedule;
  S.I = {s.I_lo, s.I_hi};
  S.eps = s.eps;
  S.rho_star = s.rho_star;
  S.anchored = s.anchored;
  S.anchor = {s.anchor_p, s.anchor_k};
  S.flat_value = s.flat_value;
  S.enc_iters = s.enc_iters;
  S.delta_used = s.delta_used;
  S.sigma_used = s.sigma_used;
  S.tau_total = s.tau_total;
  return S;
}

std::string decay_csv(const Certificate& cert) {
  std::ostringstream os;
  os << "# config=" << cert.config_hash << "\n";
  os << "j,length,bound\n";
  for (std::size_t j = 0; j < cert.decay.size(); ++j)
    os << (j + 1) << "," << format_double(cert.decay[j]) << ","
       << format_double(cert.decay_bounds[j]) << "\n";
  return os.str();
}

std::string cauchy_csv(const Certificate& cert) {
  std::ostringstream os;
  os << "# config=" << cert.config_hash << "\n";
  os << "i,cj_distance,bound\n";
  for (std::size_t i = 0; i < cert.cauchy.size(); ++i)
    os << (i + 1) << "," << format_double(cert.cauchy[i]) << ","
       << format_double(std::pow(0.5, static_cast<int>(i) + 1)) << "\n";
  return os.str();
}

std::string conditions_csv(const Certificate& cert) {
  std::ostringstream os;
  os << "# config=" << cert.config_hash << "\n";
  os << "stage,condition,pass,measured,required,margin,note\n";
  for (std::size_t s = 0; s < cert.reports.size(); ++s)
    for (const auto& row : cert.reports[s].rows) {
      std::string note = row.note;
      for (auto& ch : note)
        if (ch == ',') ch = ';';
      os << s << "," << row.id << "," << (row.pass ? 1 : 0) << ","
         << format_double(row.measured) << "," << format_double(row.required) << ","
         << format_double(row.margin) << "," << note << "\n";
    }
  return os.str();
}

std::string traces_csv(const Certificate& cert) {
  std::ostringstream os;
  os << "# config=" << cert.config_hash << "\n";
  os << "step,parity,eta,theta,m,side,split_gap,fresh_order,lemma_order,orders_agree,"
        "split_c0,split_cn,refl_c0,refl_cn,stage_cnp1,tau,landing_margin\n";
  for (const auto& t : cert.traces) {
    os << t.n << "," << (t.parity == Parity::Odd ? "odd" : "even") << ","
       << format_double(t.eta) << "," << format_double(t.theta_star) << "," << t.m << ","
       << t.side << "," << format_double(t.split_gap) << "," << t.fresh_order << ","
       << t.lemma_order << "," << (t.order_prescriptions_agree ? 1 : 0) << ","
       << format_double(t.split_c0) << "," << format_double(t.split_cn) << ","
       << format_double(t.refl_c0) << "," << format_double(t.refl_cn) << ","
       << format_double(t.stage_cnp1) << "," << format_double(t.tau) << ","
       << format_double(t.landing_margin) << "\n";
  }
  return os.str();
}

std::string basin_csv(const BasinReport& rep, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config=" << config_hash << "\n";
  os << "total,budget,seed,frac_sink,frac_attractor,frac_unresolved,half_width,"
        "probes_checked,probes_all_attractor\n";
  os << rep.total << "," << rep.budget << "," << rep.seed << ","
     << format_double(rep.frac_sink) << "," << format_double(rep.frac_attractor) << ","
     << format_double(rep.frac_unresolved) << "," << format_double(rep.half_width) << ","
     << (rep.probes_checked ? 1 : 0) << "," << (rep.probes_all_attractor ? 1 : 0) << "\n";
  return os.str();
}

std::string gapcover_csv(const GapCover& cover, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config=" << config_hash << "\n";
  os << "# total_length=" << format_double(cover.total_length) << "\n";
  os << "depth,lo,hi,length,clipped\n";
  for (const auto& e : cover.entries)
    os << e.depth << "," << format_double(frac_part(e.arc.lo)) << ","
       << format_double(frac_part(e.arc.lo) + e.arc.length()) << ","
       << format_double(e.arc.length()) << "," << (e.boundary_clipped ? 1 : 0) << "\n";
  return os.str();
}

std::string trace_csv(const SuspensionTrace& tr, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config=" << config_hash << "\n";
  os << "segment,x,s\n";
  for (const auto& p : tr.pts)
    os << p.segment << "," << format_double(p.x) << "," << format_double(p.s) << "\n";
  return os.str();
}

std::string trace_svg(const SuspensionTrace& tr, const std::vector<IntervalOnCircle>& flats,
                      const std::string& config_hash) {
  const int W = 640, H = 640;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<!-- config=" << config_hash << " -->\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& F : flats) {
    double lo = frac_part(F.lo);
    double len = F.length();
    auto band = [&](double x0, double x1) {
      os << "<rect x=\"" << x0 * W << "\" y=\"0\" width=\"" << (x1 - x0) * W << "\" height=\""
         << H << "\" fill=\"#f4c7c3\" fill-opacity=\"0.6\"/>\n";
    };
    if (lo + len <= 1.0) {
      band(lo, lo + len);
    } else {
      band(lo, 1.0);
      band(0.0, lo + len - 1.0);
    }
  }
  int seg = -1;
  std::ostringstream path;
  auto flush = [&]() {
    std::string p = path.str();
    if (!p.empty())
      os << "<polyline fill=\"none\" stroke=\"#1a53a1\" stroke-width=\"1\" points=\"" << p
         << "\"/>\n";
    path.str("");
  };
  for (const auto& p : tr.pts) {
    if (p.segment != seg) {
      flush();
      seg = p.segment;
    }
    path << p.x * W << "," << (1.0 - p.s) * H << " ";
  }
  flush();
  os << "</svg>\n";
  return os.str();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  for (const auto& raw : split_lines(text)) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected key=value, got: " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double parse_value_expr(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw ParseError("empty value expression");
  if (s == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
  if (s == "sqrt2m1") return std::sqrt(2.0) - 1.0;

  // a '/' at top level splits numerator/denominator
  int depth = 0;
  for (std::size_t i = s.size(); i-- > 0;) {
    char c = s[i];
    if (c == ')') ++depth;
    if (c == '(') --depth;
    if (c == '/' && depth == 0)
      return parse_value_expr(s.substr(0, i)) / parse_value_expr(s.substr(i + 1));
  }
  // top-level +/- (not a leading sign)
  depth = 0;
  for (std::size_t i = s.size(); i-- > 1;) {
    char c = s[i];
    if (c == ')') ++depth;
    if (c == '(') --depth;
    if ((c == '+' || c == '-') && depth == 0) {
      char prev = s[i - 1];
      if (prev == 'e' || prev == 'E') continue;  // exponent sign
      double lhs = parse_value_expr(s.substr(0, i));
      double rhs = parse_value_expr(s.substr(i + 1));
      return c == '+' ? lhs + rhs : lhs - rhs;
    }
  }
  if (s.front() == '(' && s.back() == ')') return parse_value_expr(s.substr(1, s.size() - 2));
  if (s.rfind("sqrt(", 0) == 0 && s.back() == ')')
    return std::sqrt(parse_value_expr(s.substr(5, s.size() - 6)));
  return to_double(s);
}

std::string canonical_config(const std::map<std::string, std::string>& kv) {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
  return os.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << content;
  if (!os) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace denjoy
