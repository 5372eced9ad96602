#include "bitml/parser.hpp"

namespace bitml {

namespace {

constexpr std::size_t kWidth = 80;
constexpr std::size_t kInlineArg = 30;

// Layout works on the compact rendering, which is always balanced.
struct Node {
  std::string atom;
  std::vector<Node> items;
  bool is_list = false;
  std::string flat;
};

Node read_node(const std::string& s, std::size_t& i) {
  Node n;
  const std::size_t start = i;
  if (s[i] == '(') {
    n.is_list = true;
    ++i;
    while (s[i] != ')') {
      if (s[i] == ' ') {
        ++i;
        continue;
      }
      n.items.push_back(read_node(s, i));
    }
    ++i;
  } else {
    while (i < s.size() && s[i] != ' ' && s[i] != '(' && s[i] != ')') ++i;
    n.atom = s.substr(start, i - start);
  }
  n.flat = s.substr(start, i - start);
  return n;
}

bool keeps_first_arg(const std::string& head) {
  return head != "choice" && head != "split" && head != "pre" && head != "and";
}

void layout(const Node& n, std::size_t indent, std::string& out) {
  if (!n.is_list || indent + n.flat.size() <= kWidth || n.items.empty()) {
    out += n.flat;
    return;
  }
  const std::string pad(indent + 2, ' ');
  std::size_t k = 0;
  out += "(";
  if (!n.items[0].is_list) {
    out += n.items[0].atom;
    k = 1;
    if (n.items.size() > 1 && keeps_first_arg(n.items[0].atom) &&
        n.items[1].flat.size() <= kInlineArg) {
      out += " " + n.items[1].flat;
      k = 2;
    }
  } else {
    layout(n.items[0], indent + 1, out);
    k = 1;
  }
  for (; k < n.items.size(); ++k) {
    out += "\n" + pad;
    layout(n.items[k], indent + 2, out);
  }
  out += ")";
}

std::string pretty(const std::string& compact) {
  std::size_t i = 0;
  Node n = read_node(compact, i);
  std::string out;
  layout(n, 0, out);
  return out;
}

std::vector<std::string> compact_forms(const ContractSpec& spec) {
  std::vector<std::string> forms;
  std::string ps = "(participants";
  for (const auto& p : spec.participants) ps += " " + p.value;
  forms.push_back(ps + ")");
  std::string hs = "(honest";
  for (const auto& h : spec.honest) hs += " " + h.value;
  forms.push_back(hs + ")");
  for (const auto& name : spec.equation_order) {
    const auto& eq = spec.equations.at(name);
    std::string sig = "(" + eq.var;
    for (const auto& p : eq.params) sig += " " + p;
    sig += ")";
    forms.push_back("(define " + sig + " " + key_of(eq.body.pre) + " " +
                    eq.body.contract.key() + ")");
  }
  forms.push_back("(main " + key_of(spec.root.pre) + " " + spec.root.contract.key() + ")");
  return forms;
}

}  // namespace

std::string print_compact(const ContractSpec& spec) {
  std::string out;
  for (const auto& f : compact_forms(spec)) out += f + "\n";
  return out;
}

std::string pretty_print(const ContractSpec& spec) {
  std::string out;
  for (const auto& f : compact_forms(spec)) out += pretty(f) + "\n\n";
  if (!out.empty()) out.pop_back();
  return out;
}

std::string print_contract(const Contract& c) { return pretty(c.key()); }

std::string print_advertisement(const Advertisement& adv) {
  std::string out = adv.renegotiates ? "; renegotiates " + *adv.renegotiates + "\n" : "";
  return out + pretty(key_of(adv.pre)) + "\n" + pretty(adv.contract.key());
}

}  // namespace bitml
