#include <cctype>
#include <charconv>
#include <sstream>

#include "skillshift/errors.hpp"
#include "skillshift/hashing.hpp"
#include "skillshift/pddl_model.hpp"

namespace skillshift {

namespace {

struct SExpr {
  enum class Kind { list, symbol, string };
  Kind kind = Kind::symbol;
  std::string text;
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;

  bool is_symbol(std::string_view s) const { return kind == Kind::symbol && text == s; }
  std::string describe() const {
    switch (kind) {
      case Kind::list: return "'(...)'";
      case Kind::string: return "string \"" + text + "\"";
      case Kind::symbol: return "'" + text + "'";
    }
    return "?";
  }
};

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExpr read_document() {
    skip_space();
    if (at_end()) fail("'('", "end of input");
    SExpr root = read();
    skip_space();
    if (!at_end()) fail("end of input", "'" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  [[noreturn]] void fail(const std::string& expected, const std::string& found) const {
    throw SyntaxError(line_, column_, expected, found);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (!at_end() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SExpr node;
    node.line = line_;
    node.column = column_;
    const char c = text_[pos_];
    if (c == '(') {
      node.kind = SExpr::Kind::list;
      advance();
      while (true) {
        skip_space();
        if (at_end()) fail("')'", "end of input");
        if (text_[pos_] == ')') {
          advance();
          return node;
        }
        node.items.push_back(read());
      }
    }
    if (c == ')') fail("'(' or symbol", "')'");
    if (c == '"') {
      node.kind = SExpr::Kind::string;
      advance();
      while (true) {
        if (at_end()) fail("closing '\"'", "end of input");
        char ch = text_[pos_];
        if (ch == '"') {
          advance();
          return node;
        }
        if (ch == '\\') {
          advance();
          if (at_end()) fail("escaped character", "end of input");
          ch = text_[pos_];
          if (ch != '"' && ch != '\\') fail("'\\\"' or '\\\\'", std::string("'\\") + ch + "'");
        }
        node.text.push_back(ch);
        advance();
      }
    }
    node.kind = SExpr::Kind::symbol;
    while (!at_end()) {
      const char ch = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' || ch == ')' || ch == ';' ||
          ch == '"') {
        break;
      }
      node.text.push_back(ch);
      advance();
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

[[noreturn]] void unexpected(const SExpr& node, const std::string& expected) {
  throw SyntaxError(node.line, node.column, expected, node.describe());
}

const SExpr& expect_list(const SExpr& node, const std::string& what) {
  if (node.kind != SExpr::Kind::list) unexpected(node, what);
  return node;
}

std::string expect_name(const SExpr& node, const std::string& what) {
  if (node.kind != SExpr::Kind::symbol || !is_identifier(node.text)) unexpected(node, what);
  return node.text;
}

[[noreturn]] void end_of_list(const SExpr& list, const std::string& expected) {
  throw SyntaxError(list.line, list.column, expected, "end of list");
}

const SExpr& item(const SExpr& list, std::size_t index, const std::string& expected) {
  if (index >= list.items.size()) end_of_list(list, expected);
  return list.items[index];
}

void expect_length(const SExpr& list, std::size_t length) {
  if (list.items.size() > length) unexpected(list.items[length], "')'");
}

// (name - type) with optional trailing flags.
std::pair<std::string, std::string> read_typed(const SExpr& node, const std::string& what,
                                               std::vector<std::string>* flags = nullptr) {
  expect_list(node, "(" + what + " - type)");
  const std::string name = expect_name(item(node, 0, what + " name"), what + " name");
  const SExpr& dash = item(node, 1, "'-'");
  if (!dash.is_symbol("-")) unexpected(dash, "'-'");
  const std::string type = expect_name(item(node, 2, "type name"), "type name");
  for (std::size_t i = 3; i < node.items.size(); ++i) {
    const SExpr& flag = node.items[i];
    if (flags == nullptr || flag.kind != SExpr::Kind::symbol || flag.text.empty() ||
        flag.text.front() != ':') {
      unexpected(flag, "')'");
    }
    flags->push_back(flag.text);
  }
  return {name, type};
}

Literal read_literal(const SExpr& node, bool allow_negation) {
  expect_list(node, "literal '(Pred args...)'");
  const SExpr& head = item(node, 0, "predicate name");
  if (head.is_symbol("not")) {
    if (!allow_negation) unexpected(head, "positive literal");
    expect_length(node, 2);
    return negate(read_literal(item(node, 1, "negated literal"), false));
  }
  Atom atom;
  atom.predicate = expect_name(head, "predicate name");
  for (std::size_t i = 1; i < node.items.size(); ++i) {
    atom.args.push_back(expect_name(node.items[i], "argument name"));
  }
  return pos(std::move(atom));
}

Region read_region(const SExpr& node) {
  expect_list(node, "(name :target t :kind k [:capacity c])");
  Region region;
  region.name = expect_name(item(node, 0, "region name"), "region name");
  bool has_target = false;
  bool has_kind = false;
  std::optional<std::optional<int>> capacity;
  for (std::size_t i = 1; i < node.items.size(); i += 2) {
    const SExpr& key = node.items[i];
    const SExpr& value = item(node, i + 1, "value for " + key.describe());
    if (key.is_symbol(":target") && !has_target) {
      region.target = expect_name(value, "target entity");
      has_target = true;
    } else if (key.is_symbol(":kind") && !has_kind) {
      const auto kind = value.kind == SExpr::Kind::symbol ? region_kind_from_string(value.text)
                                                          : std::nullopt;
      if (!kind) unexpected(value, "surface|slot|container_interior");
      region.kind = *kind;
      has_kind = true;
    } else if (key.is_symbol(":capacity") && !capacity) {
      if (value.is_symbol("unbounded")) {
        capacity = std::optional<int>{};
      } else {
        int parsed = 0;
        const auto* first = value.text.data();
        const auto* last = first + value.text.size();
        const auto [ptr, ec] = std::from_chars(first, last, parsed);
        if (value.kind != SExpr::Kind::symbol || ec != std::errc{} || ptr != last) {
          unexpected(value, "integer or 'unbounded'");
        }
        capacity = std::optional<int>{parsed};
      }
    } else {
      unexpected(key, "':target', ':kind' or ':capacity'");
    }
  }
  if (!has_target) end_of_list(node, "':target'");
  if (!has_kind) end_of_list(node, "':kind'");
  region.capacity = capacity ? *capacity : default_capacity(region.kind);
  return region;
}

void insert_unique(std::map<std::string, std::string>& map, const SExpr& at,
                   const std::string& name, const std::string& value) {
  if (!map.emplace(name, value).second) {
    throw ValidationError("duplicate name '" + name + "' at line " + std::to_string(at.line));
  }
}

std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

SceneProblem parse_problem(std::string_view text) {
  const SExpr root = Reader(text).read_document();
  expect_list(root, "'(define ...)'");
  if (!item(root, 0, "'define'").is_symbol("define")) unexpected(root.items[0], "'define'");

  SceneProblem problem;
  const SExpr& header = expect_list(item(root, 1, "'(problem NAME)'"), "'(problem NAME)'");
  if (!item(header, 0, "'problem'").is_symbol("problem")) unexpected(header.items[0], "'problem'");
  problem.problem_name = expect_name(item(header, 1, "problem name"), "problem name");
  expect_length(header, 2);

  std::set<std::string> seen;
  bool has_domain = false;
  AtomSet init;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& section = expect_list(root.items[i], "section '(:keyword ...)'");
    const SExpr& key = item(section, 0, "section keyword");
    if (key.kind != SExpr::Kind::symbol || !seen.insert(key.text).second) {
      unexpected(key, "a section keyword not yet used");
    }
    if (key.text == ":domain") {
      problem.domain_name = expect_name(item(section, 1, "domain name"), "domain name");
      expect_length(section, 2);
      has_domain = true;
    } else if (key.text == ":instruction") {
      const SExpr& value = item(section, 1, "instruction string");
      if (value.kind != SExpr::Kind::string) unexpected(value, "instruction string");
      problem.instruction = value.text;
      expect_length(section, 2);
    } else if (key.text == ":objects") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        const auto [name, type] = read_typed(section.items[j], "object");
        insert_unique(problem.objects, section.items[j], name, type);
      }
    } else if (key.text == ":fixtures") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        std::vector<std::string> flags;
        const auto [name, type] = read_typed(section.items[j], "fixture", &flags);
        Fixture fixture{type, false};
        for (const auto& flag : flags) {
          if (flag != ":switchable" || fixture.switchable) {
            unexpected(section.items[j], "':switchable' at most once");
          }
          fixture.switchable = true;
        }
        if (!problem.fixtures.emplace(name, fixture).second) {
          throw ValidationError("duplicate name '" + name + "'");
        }
      }
    } else if (key.text == ":fixture-parts") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        const auto [part, owner] = read_typed(section.items[j], "part");
        insert_unique(problem.fixture_parts, section.items[j], part, owner);
      }
    } else if (key.text == ":regions") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        Region region = read_region(section.items[j]);
        const std::string name = region.name;
        if (!problem.regions.emplace(name, std::move(region)).second) {
          throw ValidationError("duplicate name '" + name + "'");
        }
      }
    } else if (key.text == ":init") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        const SExpr& node = section.items[j];
        if (node.kind == SExpr::Kind::list && !node.items.empty() && node.items[0].is_symbol("not")) {
          throw ValidationError("negative literal in :init at line " + std::to_string(node.line) +
                                " (states are closed-world)");
        }
        Literal lit = read_literal(node, false);
        if (!init.insert(lit.atom).second) {
          throw ValidationError("duplicate :init literal " + to_string(lit.atom));
        }
      }
    } else if (key.text == ":goal") {
      const SExpr& body = expect_list(item(section, 1, "'(and ...)'"), "'(and ...)'");
      expect_length(section, 2);
      if (!body.items.empty() && body.items[0].is_symbol("and")) {
        for (std::size_t j = 1; j < body.items.size(); ++j) {
          problem.goal.insert(read_literal(body.items[j], true));
        }
      } else {
        problem.goal.insert(read_literal(body, true));
      }
    } else {
      unexpected(key, "one of :domain :instruction :objects :fixtures :fixture-parts :regions "
                      ":init :goal");
    }
  }
  if (!has_domain) end_of_list(root, "'(:domain NAME)'");

  problem.init = SymbolicState(std::move(init));
  validate_problem(problem);
  return problem;
}

std::string serialize_problem(const SceneProblem& problem) {
  std::ostringstream out;
  out << "(define (problem " << problem.problem_name << ")\n";
  out << "  (:domain " << problem.domain_name << ")\n";
  out << "  (:instruction " << quote(problem.instruction) << ")\n";

  out << "  (:objects";
  for (const auto& [name, type] : problem.objects) out << "\n    (" << name << " - " << type << ")";
  out << ")\n";

  out << "  (:fixtures";
  for (const auto& [name, fixture] : problem.fixtures) {
    out << "\n    (" << name << " - " << fixture.type << (fixture.switchable ? " :switchable" : "")
        << ")";
  }
  out << ")\n";

  out << "  (:fixture-parts";
  for (const auto& [part, owner] : problem.fixture_parts) out << "\n    (" << part << " - " << owner << ")";
  out << ")\n";

  out << "  (:regions";
  for (const auto& [name, region] : problem.regions) {
    out << "\n    (" << name << " :target " << region.target << " :kind " << to_string(region.kind)
        << " :capacity "
        << (region.capacity ? std::to_string(*region.capacity) : std::string("unbounded")) << ")";
  }
  out << ")\n";

  out << "  (:init";
  for (const Atom& atom : problem.init.atoms()) out << "\n    " << to_string(atom);
  out << ")\n";

  out << "  (:goal (and";
  for (const Literal& lit : problem.goal) out << "\n    " << to_string(lit);
  out << ")))\n";
  return out.str();
}

std::string content_id(const SceneProblem& problem) {
  return sha256_hex(serialize_problem(problem));
}

}  // namespace skillshift
