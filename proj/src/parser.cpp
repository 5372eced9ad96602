#include "bitml/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace bitml {

std::string ParseError::format() const {
  return std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message;
}

namespace {

constexpr std::size_t kMaxNesting = 256;

struct Sx {
  bool is_list = false;
  std::string atom;
  std::vector<Sx> items;
  SourceSpan span;

  bool is_atom(std::string_view s) const { return !is_list && atom == s; }
  bool has_head(std::string_view s) const {
    return is_list && !items.empty() && items.front().is_atom(s);
  }
};

struct Fail {
  ParseError error;
};

[[noreturn]] void fail(const SourceSpan& span, std::string msg,
                       std::vector<std::string> expected = {}) {
  throw Fail{ParseError{span, std::move(msg), std::move(expected)}};
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<Sx> read_all() {
    std::vector<Sx> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(read(0));
      skip();
    }
    return out;
  }

  SourceSpan here() const { return {pos_, pos_, line_, col_}; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool delimiter(char c) {
    return c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c));
  }

  Sx read(std::size_t depth) {
    Sx node;
    node.span = here();
    const char c = text_[pos_];
    if (c == ')') fail(node.span, "unexpected ')'");
    if (c == '(') {
      if (depth >= kMaxNesting) fail(node.span, "nesting too deep");
      node.is_list = true;
      advance();
      skip();
      while (true) {
        if (pos_ >= text_.size()) fail(node.span, "unbalanced '(': missing ')'", {")"});
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read(depth + 1));
        skip();
      }
    } else {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && !delimiter(text_[pos_])) advance();
      node.atom = std::string(text_.substr(start, pos_ - start));
    }
    node.span.end = pos_;
    return node;
  }
};

bool valid_ident(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) return false;
  return true;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "participants", "honest", "define", "main",  "pre",   "deposit", "secret",
      "var",          "choice", "withdraw", "put", "if",    "split",   "auth",
      "after",        "rngt",   "true",   "and",   "not",   "between"};
  return k;
}

std::string describe(const Sx& s) {
  if (!s.is_list) return "'" + s.atom + "'";
  if (!s.items.empty() && !s.items.front().is_list) return "(" + s.items.front().atom + " ...)";
  return "a list";
}

class Builder {
 public:
  ContractSpec build(const std::vector<Sx>& forms, const SourceSpan& eof) {
    ContractSpec spec;
    std::size_t i = 0;
    if (i >= forms.size() || !forms[i].has_head("participants"))
      fail(i < forms.size() ? forms[i].span : eof, "expected (participants ...)",
           {"(participants ...)"});
    spec.participants = participants(forms[i++], "participants");
    if (i >= forms.size() || !forms[i].has_head("honest"))
      fail(i < forms.size() ? forms[i].span : eof, "expected (honest ...)", {"(honest ...)"});
    {
      auto hs = participants(forms[i++], "honest");
      spec.honest.insert(hs.begin(), hs.end());
    }
    while (i < forms.size() && forms[i].has_head("define")) {
      const Sx& d = forms[i++];
      if (d.items.size() != 4)
        fail(d.span, "expected (define (X params...) (pre ...) contract)");
      const Sx& sig = d.items[1];
      if (!sig.is_list || sig.items.empty())
        fail(sig.span, "expected (X params...) after define", {"(X ...)"});
      Equation eq;
      eq.var = ident(sig.items[0], "recursion variable");
      for (std::size_t k = 1; k < sig.items.size(); ++k)
        eq.params.push_back(ident(sig.items[k], "parameter"));
      if (spec.equations.count(eq.var))
        fail(sig.items[0].span, "duplicate definition of " + eq.var);
      params_ = {eq.params.begin(), eq.params.end()};
      eq.body = advert(d.items[2], d.items[3]);
      spans_["define " + eq.var] = d.span;
      spec.equation_order.push_back(eq.var);
      spec.equations.emplace(eq.var, std::move(eq));
    }
    if (i >= forms.size() || !forms[i].has_head("main"))
      fail(i < forms.size() ? forms[i].span : eof, "expected (main ...)", {"(main ...)", "(define ...)"});
    {
      const Sx& m = forms[i++];
      if (m.items.size() != 3) fail(m.span, "expected (main (pre ...) contract)");
      params_.clear();
      spec.root = advert(m.items[1], m.items[2]);
      spans_["main"] = m.span;
    }
    if (i < forms.size()) fail(forms[i].span, "unexpected form after (main ...)");
    return spec;
  }

  SourceSpan span_for(const std::string& location) const {
    for (const auto& [prefix, span] : spans_)
      if (location.rfind(prefix, 0) == 0) return span;
    auto it = spans_.find("main");
    return it == spans_.end() ? SourceSpan{} : it->second;
  }

 private:
  std::set<std::string> params_;
  std::set<std::string> secrets_;
  std::map<std::string, SourceSpan> spans_;

  std::string ident(const Sx& s, const std::string& what) {
    if (s.is_list || !valid_ident(s.atom) || keywords().count(s.atom))
      fail(s.span, "expected " + what + ", got " + describe(s), {"identifier"});
    return s.atom;
  }

  std::vector<Participant> participants(const Sx& s, const std::string& head) {
    if (s.items.size() < 2) fail(s.span, "(" + head + " ...) needs at least one participant");
    std::vector<Participant> out;
    for (std::size_t k = 1; k < s.items.size(); ++k)
      out.push_back(Participant{ident(s.items[k], "participant")});
    return out;
  }

  Rational rational(const Sx& s) {
    Rational r;
    if (s.is_list || !parse_rational(s.atom, r) || r < 0)
      fail(s.span, "expected non-negative rational, got " + describe(s), {"rational"});
    return r;
  }

  Advertisement advert(const Sx& pre, const Sx& body) {
    if (!pre.has_head("pre")) fail(pre.span, "expected (pre ...)", {"(pre ...)"});
    Advertisement adv;
    secrets_.clear();
    for (std::size_t k = 1; k < pre.items.size(); ++k) {
      const Sx& a = pre.items[k];
      if (a.has_head("deposit")) {
        if (a.items.size() != 4) fail(a.span, "expected (deposit A value ref)");
        Participant owner{ident(a.items[1], "participant")};
        Rational v = rational(a.items[2]);
        DepositRef ref;
        const Sx& r = a.items[3];
        if (r.has_head("var")) {
          if (r.items.size() != 2) fail(r.span, "expected (var name)");
          ref = {true, ident(r.items[1], "deposit variable")};
        } else {
          ref = {false, ident(r, "deposit name")};
        }
        adv.pre.push_back(deposit_atom(owner, v, ref));
      } else if (a.has_head("secret")) {
        if (a.items.size() != 3) fail(a.span, "expected (secret A name)");
        Participant owner{ident(a.items[1], "participant")};
        std::string name = ident(a.items[2], "secret name");
        secrets_.insert(name);
        adv.pre.push_back(secret_atom(owner, name));
      } else {
        fail(a.span, "expected (deposit ...) or (secret ...), got " + describe(a),
             {"(deposit ...)", "(secret ...)"});
      }
    }
    adv.contract = contract(body);
    return adv;
  }

  Contract contract(const Sx& s) {
    if (s.has_head("choice")) {
      std::vector<Guarded> bs;
      for (std::size_t k = 1; k < s.items.size(); ++k) bs.push_back(guarded(s.items[k]));
      return Contract(std::move(bs));
    }
    return single(guarded(s));
  }

  Guarded guarded(const Sx& s) {
    static const std::vector<std::string> expected = {"(withdraw ...)", "(put ...)",
                                                      "(split ...)",    "(auth ...)",
                                                      "(after ...)",    "(rngt ...)"};
    if (!s.is_list || s.items.empty() || s.items[0].is_list)
      fail(s.span, "expected guarded contract, got " + describe(s), expected);
    const std::string& head = s.items[0].atom;
    if (head == "withdraw") {
      if (s.items.size() != 2) fail(s.span, "expected (withdraw A)");
      return gwithdraw(Participant{ident(s.items[1], "participant")});
    }
    if (head == "put") {
      if (s.items.size() != 3 && s.items.size() != 4)
        fail(s.span, "expected (put (secrets...) [(if pred)] contract)");
      const Sx& ids = s.items[1];
      if (!ids.is_list) fail(ids.span, "expected secret list", {"(a b ...)"});
      std::vector<std::string> names;
      for (const auto& i : ids.items) names.push_back(ident(i, "secret name"));
      Predicate p = ptrue();
      std::size_t body = 2;
      if (s.items.size() == 4) {
        const Sx& cond = s.items[2];
        if (!cond.has_head("if") || cond.items.size() != 2)
          fail(cond.span, "expected (if pred)", {"(if ...)"});
        p = pred(cond.items[1]);
        body = 3;
      }
      return gput(std::move(names), p, contract(s.items[body]));
    }
    if (head == "split") {
      if (s.items.size() < 2) fail(s.span, "split needs at least one branch");
      std::vector<SplitBranch> parts;
      for (std::size_t k = 1; k < s.items.size(); ++k) {
        const Sx& b = s.items[k];
        if (!b.is_list || b.items.size() != 3 || !b.items[1].is_atom("->"))
          fail(b.span, "expected (weight -> contract)", {"(w -> C)"});
        parts.push_back({rational(b.items[0]), contract(b.items[2])});
      }
      return gsplit(std::move(parts));
    }
    if (head == "auth") {
      if (s.items.size() != 3) fail(s.span, "expected (auth A guarded)");
      return gauth(Participant{ident(s.items[1], "participant")}, guarded(s.items[2]));
    }
    if (head == "after") {
      if (s.items.size() != 3) fail(s.span, "expected (after time guarded)");
      return gafter(sexpr(s.items[1]), guarded(s.items[2]));
    }
    if (head == "rngt") {
      if (s.items.size() < 2) fail(s.span, "expected (rngt X args...)");
      std::string var = ident(s.items[1], "recursion variable");
      std::vector<StaticExpr> args;
      for (std::size_t k = 2; k < s.items.size(); ++k) args.push_back(sexpr(s.items[k]));
      return grngt(var, std::move(args));
    }
    fail(s.items[0].span, "unknown contract form " + describe(s), expected);
  }

  StaticExpr sexpr(const Sx& s) {
    if (!s.is_list) {
      Integer k;
      if (parse_integer(s.atom, k)) return sconst(k);
      std::string name = ident(s, "static expression");
      if (!params_.count(name)) fail(s.span, "unbound variable " + name);
      return svar(name);
    }
    if (s.items.size() != 3 || s.items[0].is_list)
      fail(s.span, "expected (op e e) static expression", {"(+ e e)", "(- e e)", "(* e e)"});
    const std::string& op = s.items[0].atom;
    StaticNode::Kind k;
    if (op == "+") k = StaticNode::Kind::Add;
    else if (op == "-") k = StaticNode::Kind::Sub;
    else if (op == "*") k = StaticNode::Kind::Mul;
    else fail(s.items[0].span, "unknown operator " + describe(s.items[0]), {"+", "-", "*"});
    return sbin(k, sexpr(s.items[1]), sexpr(s.items[2]));
  }

  ArithExpr aexpr(const Sx& s) {
    if (!s.is_list) {
      Integer k;
      if (parse_integer(s.atom, k)) return astatic(sconst(k));
      std::string name = ident(s, "expression");
      if (secrets_.count(name)) return asecret(name);
      if (params_.count(name)) return astatic(svar(name));
      fail(s.span, "unknown identifier " + name + " (neither a secret nor a parameter)");
    }
    if (s.items.size() != 3 || s.items[0].is_list)
      fail(s.span, "expected (op e e) expression", {"(+ e e)", "(- e e)"});
    const std::string& op = s.items[0].atom;
    if (op == "+") return aadd(aexpr(s.items[1]), aexpr(s.items[2]));
    if (op == "-") return asub(aexpr(s.items[1]), aexpr(s.items[2]));
    if (op == "*") return astatic(sexpr(s));
    fail(s.items[0].span, "unknown operator " + describe(s.items[0]), {"+", "-"});
  }

  Predicate pred(const Sx& s) {
    if (s.is_atom("true")) return ptrue();
    if (!s.is_list || s.items.empty() || s.items[0].is_list)
      fail(s.span, "expected predicate, got " + describe(s),
           {"true", "(and ...)", "(not ...)", "(= ...)", "(< ...)", "(between ...)"});
    const std::string& head = s.items[0].atom;
    auto arity = [&](std::size_t n) {
      if (s.items.size() != n + 1)
        fail(s.span, "(" + head + " ...) expects " + std::to_string(n) + " operand(s)");
    };
    if (head == "and") {
      arity(2);
      return pand(pred(s.items[1]), pred(s.items[2]));
    }
    if (head == "not") {
      arity(1);
      return pnot(pred(s.items[1]));
    }
    if (head == "=") {
      arity(2);
      return peq(aexpr(s.items[1]), aexpr(s.items[2]));
    }
    if (head == "<") {
      arity(2);
      return plt(aexpr(s.items[1]), aexpr(s.items[2]));
    }
    if (head == "between") {
      arity(3);
      return pbetween(aexpr(s.items[1]), aexpr(s.items[2]), aexpr(s.items[3]));
    }
    fail(s.items[0].span, "unknown predicate " + describe(s),
         {"and", "not", "=", "<", "between"});
  }
};

}  // namespace

ParseResult parse_spec(std::string_view text) {
  ParseResult result;
  Reader reader(text);
  Builder builder;
  try {
    auto forms = reader.read_all();
    SourceSpan eof{text.size(), text.size(), 1, 1};
    {
      std::size_t line = 1, col = 1;
      for (char c : text) {
        if (c == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      eof.line = line;
      eof.column = col;
    }
    ContractSpec spec = builder.build(forms, eof);
    for (const auto& v : check_spec(spec)) {
      ParseError e;
      e.span = builder.span_for(v.location);
      e.message = v.message + " [" + v.location + "]";
      result.errors.push_back(std::move(e));
    }
    result.spec = std::move(spec);
  } catch (const Fail& f) {
    result.errors.push_back(f.error);
  } catch (const Error& e) {
    result.errors.push_back(ParseError{reader.here(), e.what(), {}});
  }
  if (!result.errors.empty()) result.spec.reset();
  return result;
}

ContractSpec parse_spec_or_throw(std::string_view text) {
  auto r = parse_spec(text);
  if (r.ok()) return std::move(*r.spec);
  std::string msg;
  for (const auto& e : r.errors) {
    if (!msg.empty()) msg += "\n";
    msg += e.format();
  }
  throw Error(msg);
}

ContractSpec load_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_spec_or_throw(ss.str());
  } catch (const Error& e) {
    throw Error(path + ":" + e.what());
  }
}

}  // namespace bitml
