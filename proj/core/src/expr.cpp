#include "denjoy/expr.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <sstream>

#include "denjoy/errors.hpp"

namespace denjoy {

namespace {

ExprPtr make(ExprKind kind, double a, double b, int k, std::vector<ExprPtr> kids = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->a = a;
  e->b = b;
  e->k = k;
  e->kids = std::move(kids);
  return e;
}

double ipow(double x, int k) {
  if (k < 0) return 1.0 / ipow(x, -k);
  double r = 1.0, base = x;
  int n = k;
  while (n > 0) {
    if (n & 1) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}

bool is_const(const ExprPtr& e, double v) { return e->kind == ExprKind::Const && e->a == v; }

}  // namespace

double Expr::eval(double x) const {
  switch (kind) {
    case ExprKind::Const:
      return a;
    case ExprKind::Affine:
      return a + b * x;
    case ExprKind::Mon:
      return ipow(x - a, k);
    case ExprKind::MollR:
      return x > a ? std::exp(-b / (x - a)) : 0.0;
    case ExprKind::MollL:
      return x < a ? std::exp(-b / (a - x)) : 0.0;
    case ExprKind::Sum: {
      double r = 0.0;
      for (const auto& kid : kids) r += kid->eval(x);
      return r;
    }
    case ExprKind::Prod: {
      // A vanished mollifier factor wins over inf from negative monomial
      // powers: the product is exactly 0 on the flat side. Long double keeps
      // transient magnitudes of high-order mollifier derivatives in range.
      long double r = 1.0L;
      bool zero = false;
      for (const auto& kid : kids) {
        double v = kid->eval(x);
        if (v == 0.0) {
          zero = true;
          break;
        }
        r *= v;
      }
      if (zero) return 0.0;
      return static_cast<double>(r);
    }
    case ExprKind::Comp:
      return kids[0]->eval(kids[1]->eval(x));
  }
  return 0.0;
}

ExprPtr kconst(double v) { return make(ExprKind::Const, v, 0, 0); }

ExprPtr affine(double a, double b) {
  if (b == 0.0) return kconst(a);
  return make(ExprKind::Affine, a, b, 0);
}

ExprPtr mon(double c, int k) {
  if (k == 0) return kconst(1.0);
  return make(ExprKind::Mon, c, 0, k);
}

ExprPtr mollr(double s, double c) { return make(ExprKind::MollR, c, s, 0); }
ExprPtr molll(double s, double c) { return make(ExprKind::MollL, c, s, 0); }

ExprPtr sum(std::vector<ExprPtr> kids) {
  std::vector<ExprPtr> flat;
  double c = 0.0;
  for (auto& kid : kids) {
    if (!kid) continue;
    if (kid->kind == ExprKind::Sum) {
      for (const auto& g : kid->kids) {
        if (g->kind == ExprKind::Const)
          c += g->a;
        else
          flat.push_back(g);
      }
    } else if (kid->kind == ExprKind::Const) {
      c += kid->a;
    } else {
      flat.push_back(kid);
    }
  }
  if (c != 0.0) flat.insert(flat.begin(), kconst(c));
  if (flat.empty()) return kconst(0.0);
  if (flat.size() == 1) return flat[0];
  return make(ExprKind::Sum, 0, 0, 0, std::move(flat));
}

ExprPtr prod(std::vector<ExprPtr> kids) {
  std::vector<ExprPtr> flat;
  double c = 1.0;
  for (auto& kid : kids) {
    if (!kid) continue;
    if (kid->kind == ExprKind::Prod) {
      for (const auto& g : kid->kids) {
        if (g->kind == ExprKind::Const)
          c *= g->a;
        else
          flat.push_back(g);
      }
    } else if (kid->kind == ExprKind::Const) {
      c *= kid->a;
    } else {
      flat.push_back(kid);
    }
  }
  if (c == 0.0) return kconst(0.0);
  // Merge monomials with the same center and mollifiers with the same
  // center/side; this keeps derivative trees compact.
  std::vector<ExprPtr> merged;
  for (auto& f : flat) {
    bool done = false;
    for (auto& m : merged) {
      if (f->kind == ExprKind::Mon && m->kind == ExprKind::Mon && f->a == m->a) {
        int kk = f->k + m->k;
        m = kk == 0 ? kconst(1.0) : mon(f->a, kk);
        done = true;
        break;
      }
      if ((f->kind == ExprKind::MollR || f->kind == ExprKind::MollL) && f->kind == m->kind &&
          f->a == m->a) {
        m = make(f->kind, f->a, f->b + m->b, 0);
        done = true;
        break;
      }
    }
    if (!done) merged.push_back(f);
  }
  std::vector<ExprPtr> out;
  for (auto& m : merged)
    if (!is_const(m, 1.0)) out.push_back(m);
  if (c != 1.0) out.insert(out.begin(), kconst(c));
  if (out.empty()) return kconst(1.0);
  if (out.size() == 1) return out[0];
  return make(ExprKind::Prod, 0, 0, 0, std::move(out));
}

ExprPtr comp(ExprPtr f, ExprPtr g) {
  if (f->kind == ExprKind::Const) return f;
  if (f->kind == ExprKind::Affine) return sum({kconst(f->a), prod({kconst(f->b), g})});
  if (g->kind == ExprKind::Const) return kconst(f->eval(g->a));
  return make(ExprKind::Comp, 0, 0, 0, {std::move(f), std::move(g)});
}

ExprPtr derivative(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Const:
      return kconst(0.0);
    case ExprKind::Affine:
      return kconst(e->b);
    case ExprKind::Mon:
      if (e->k == 1) return kconst(1.0);
      return prod({kconst(static_cast<double>(e->k)), mon(e->a, e->k - 1)});
    case ExprKind::MollR:
      return prod({kconst(e->b), make(ExprKind::MollR, e->a, e->b, 0), mon(e->a, -2)});
    case ExprKind::MollL:
      return prod({kconst(-e->b), make(ExprKind::MollL, e->a, e->b, 0), mon(e->a, -2)});
    case ExprKind::Sum: {
      std::vector<ExprPtr> kids;
      kids.reserve(e->kids.size());
      for (const auto& kid : e->kids) kids.push_back(derivative(kid));
      return sum(std::move(kids));
    }
    case ExprKind::Prod: {
      std::vector<ExprPtr> terms;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        std::vector<ExprPtr> factors;
        for (std::size_t j = 0; j < e->kids.size(); ++j)
          factors.push_back(i == j ? derivative(e->kids[j]) : e->kids[j]);
        terms.push_back(prod(std::move(factors)));
      }
      return sum(std::move(terms));
    }
    case ExprKind::Comp:
      return prod({comp(derivative(e->kids[0]), e->kids[1]), derivative(e->kids[1])});
  }
  return kconst(0.0);
}

ExprPtr shift(const ExprPtr& e, double dx, double dy) {
  // inner(x) = e(x + dx); dy added at top level by the caller-facing wrapper.
  struct Rec {
    static ExprPtr go(const ExprPtr& e, double dx) {
      switch (e->kind) {
        case ExprKind::Const:
          return e;
        case ExprKind::Affine:
          return affine(e->a + e->b * dx, e->b);
        case ExprKind::Mon:
          return mon(e->a - dx, e->k);
        case ExprKind::MollR:
          return mollr(e->b, e->a - dx);
        case ExprKind::MollL:
          return molll(e->b, e->a - dx);
        case ExprKind::Sum: {
          std::vector<ExprPtr> kids;
          for (const auto& kid : e->kids) kids.push_back(go(kid, dx));
          return sum(std::move(kids));
        }
        case ExprKind::Prod: {
          std::vector<ExprPtr> kids;
          for (const auto& kid : e->kids) kids.push_back(go(kid, dx));
          return prod(std::move(kids));
        }
        case ExprKind::Comp:
          return comp(e->kids[0], go(e->kids[1], dx));
      }
      return e;
    }
  };
  ExprPtr shifted = Rec::go(e, dx);
  if (dy == 0.0) return shifted;
  return sum({shifted, kconst(dy)});
}

std::size_t node_count(const ExprPtr& e) {
  std::size_t n = 1;
  for (const auto& kid : e->kids) n += node_count(kid);
  return n;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print(std::ostream& os, const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Const:
      os << "(const " << format_double(e->a) << ")";
      return;
    case ExprKind::Affine:
      os << "(affine " << format_double(e->a) << " " << format_double(e->b) << ")";
      return;
    case ExprKind::Mon:
      os << "(mon " << format_double(e->a) << " " << e->k << ")";
      return;
    case ExprKind::MollR:
      os << "(mollr " << format_double(e->b) << " " << format_double(e->a) << ")";
      return;
    case ExprKind::MollL:
      os << "(molll " << format_double(e->b) << " " << format_double(e->a) << ")";
      return;
    case ExprKind::Sum:
    case ExprKind::Prod: {
      os << (e->kind == ExprKind::Sum ? "(sum" : "(prod");
      for (const auto& kid : e->kids) {
        os << " ";
        print(os, kid);
      }
      os << ")";
      return;
    }
    case ExprKind::Comp:
      os << "(comp ";
      print(os, e->kids[0]);
      os << " ";
      print(os, e->kids[1]);
      os << ")";
      return;
  }
}

std::string to_string(const ExprPtr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

namespace {

struct Lexer {
  const std::string& s;
  std::size_t pos = 0;

  explicit Lexer(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  char peek() {
    skip_ws();
    if (pos >= s.size()) throw ParseError("unexpected end of expression");
    return s[pos];
  }
  void expect(char c) {
    if (peek() != c) throw ParseError(std::string("expected '") + c + "' in expression");
    ++pos;
  }
  std::string word() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '(' &&
           s[pos] != ')')
      ++pos;
    if (start == pos) throw ParseError("expected token in expression");
    return s.substr(start, pos - start);
  }
  double number() {
    std::string w = word();
    try {
      std::size_t used = 0;
      double v = std::stod(w, &used);
      if (used != w.size()) throw ParseError("bad number: " + w);
      return v;
    } catch (const std::invalid_argument&) {
      throw ParseError("bad number: " + w);
    }
  }
  int integer() {
    double v = number();
    int k = static_cast<int>(v);
    if (static_cast<double>(k) != v) throw ParseError("expected integer exponent");
    return k;
  }
  bool at_close() { return peek() == ')'; }
};

ExprPtr parse_node(Lexer& lx) {
  lx.expect('(');
  std::string head = lx.word();
  ExprPtr result;
  if (head == "const") {
    result = kconst(lx.number());
  } else if (head == "affine") {
    double a = lx.number(), b = lx.number();
    result = make(ExprKind::Affine, a, b, 0);
  } else if (head == "mon") {
    double c = lx.number();
    int k = lx.integer();
    result = mon(c, k);
  } else if (head == "mollr") {
    double s = lx.number(), c = lx.number();
    result = mollr(s, c);
  } else if (head == "molll") {
    double s = lx.number(), c = lx.number();
    result = molll(s, c);
  } else if (head == "sum" || head == "prod") {
    std::vector<ExprPtr> kids;
    while (!lx.at_close()) kids.push_back(parse_node(lx));
    result = make(head == "sum" ? ExprKind::Sum : ExprKind::Prod, 0, 0, 0, std::move(kids));
  } else if (head == "comp") {
    ExprPtr f = parse_node(lx);
    ExprPtr g = parse_node(lx);
    result = make(ExprKind::Comp, 0, 0, 0, {f, g});
  } else {
    throw ParseError("unknown expression head: " + head);
  }
  lx.expect(')');
  return result;
}

}  // namespace

ExprPtr parse_expr(const std::string& text) {
  Lexer lx(text);
  ExprPtr e = parse_node(lx);
  lx.skip_ws();
  if (lx.pos != text.size()) throw ParseError("trailing characters after expression");
  return e;
}

}  // namespace denjoy
