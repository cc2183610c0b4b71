#include "leakguard/ir.hpp"

#include <cctype>
#include <sstream>
#include <unordered_set>

namespace leakguard {

std::string_view to_string(InputKind kind) {
  switch (kind) {
    case InputKind::Public: return "public";
    case InputKind::Secret: return "secret";
    case InputKind::Random: return "random";
  }
  return "?";
}

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::Not: return "not";
    case Opcode::Xor: return "xor";
    case Opcode::And: return "and";
    case Opcode::Or: return "or";
    case Opcode::Gmul: return "gmul";
  }
  return "?";
}

std::string_view to_string(Diagnostic::Kind kind) {
  switch (kind) {
    case Diagnostic::Kind::DuplicateDefinition: return "DuplicateDefinition";
    case Diagnostic::Kind::UseBeforeDef: return "UseBeforeDef";
    case Diagnostic::Kind::UndefinedOutput: return "UndefinedOutput";
    case Diagnostic::Kind::BadArity: return "BadArity";
    case Diagnostic::Kind::GmulWidth: return "GmulWidth";
    case Diagnostic::Kind::BadWidth: return "BadWidth";
  }
  return "?";
}

std::string describe(const Diagnostic& d) {
  std::ostringstream os;
  os << to_string(d.kind) << '(' << d.name << ')';
  if (d.instruction >= 0) os << " at instruction " << d.instruction;
  return os.str();
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

static std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out = "invalid program:";
  for (const auto& d : diags) out += " " + describe(d) + ";";
  return out;
}

InvalidProgram::InvalidProgram(std::vector<Diagnostic> diags)
    : std::runtime_error(join_diagnostics(diags)), diags_(std::move(diags)) {}

std::vector<Diagnostic> validate(const std::vector<Input>& inputs,
                                 const std::vector<Instruction>& instructions,
                                 const std::vector<std::string>& outputs, unsigned width) {
  using K = Diagnostic::Kind;
  std::vector<Diagnostic> diags;
  if (width == 0 || width > 32) diags.push_back({K::BadWidth, std::to_string(width), -1});

  std::unordered_set<std::string> defined;
  for (const auto& in : inputs) {
    if (!defined.insert(in.name).second) diags.push_back({K::DuplicateDefinition, in.name, -1});
  }
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    const auto& ins = instructions[i];
    const int idx = static_cast<int>(i);
    const std::size_t arity = is_unary(ins.op) ? 1 : 2;
    if (ins.operands.size() != arity) diags.push_back({K::BadArity, ins.dest, idx});
    if (ins.op == Opcode::Gmul && width != 8) diags.push_back({K::GmulWidth, ins.dest, idx});
    for (const auto& operand : ins.operands) {
      if (!defined.contains(operand)) diags.push_back({K::UseBeforeDef, operand, idx});
    }
    if (!defined.insert(ins.dest).second) diags.push_back({K::DuplicateDefinition, ins.dest, idx});
  }
  for (const auto& out : outputs) {
    if (!defined.contains(out)) diags.push_back({K::UndefinedOutput, out, -1});
  }
  return diags;
}

std::vector<Diagnostic> validate(const Program& p) {
  return validate(p.inputs(), p.instructions(), p.outputs(), p.width());
}

Program::Program(std::vector<Input> inputs, std::vector<Instruction> instructions,
                 std::vector<std::string> outputs, unsigned width)
    : inputs_(std::move(inputs)),
      instructions_(std::move(instructions)),
      outputs_(std::move(outputs)),
      width_(width) {
  index();
}

void Program::index() {
  if (auto diags = validate(*this); !diags.empty()) throw InvalidProgram(std::move(diags));
  names_.clear();
  ids_.clear();
  defs_.clear();
  for (const auto& in : inputs_) {
    ids_.emplace(in.name, static_cast<VarId>(names_.size()));
    names_.push_back(in.name);
  }
  for (const auto& ins : instructions_) {
    const auto dest = static_cast<VarId>(names_.size());
    const VarId lhs = ids_.at(ins.operands[0]);
    const VarId rhs = ins.operands.size() > 1 ? ids_.at(ins.operands[1]) : lhs;
    defs_.push_back({dest, ins.op, lhs, rhs});
    ids_.emplace(ins.dest, dest);
    names_.push_back(ins.dest);
  }
}

std::optional<VarId> Program::find(std::string_view name) const {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  return std::nullopt;
}

VarId Program::id(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw std::out_of_range("unknown variable '" + std::string(name) + "'");
}

const std::string& Program::name(VarId v) const { return names_.at(v); }

std::vector<VarId> Program::output_ids() const {
  std::vector<VarId> ids;
  ids.reserve(outputs_.size());
  for (const auto& o : outputs_) ids.push_back(ids_.at(o));
  return ids;
}

namespace {

struct Token {
  std::string text;
  std::size_t column;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' || c == ']';
}

// Splits one statement into identifier-ish words and the punctuation `=` / `,`.
std::vector<Token> tokenize(std::string_view stmt, std::size_t line, std::size_t col0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < stmt.size()) {
    const char c = stmt[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '=' || c == ',') {
      out.push_back({std::string(1, c), col0 + i});
      ++i;
    } else if (is_ident_start(c)) {
      const std::size_t start = i;
      while (i < stmt.size() && is_ident_char(stmt[i])) ++i;
      out.push_back({std::string(stmt.substr(start, i - start)), col0 + start});
    } else {
      throw ParseError(line, col0 + i, std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

std::optional<Opcode> opcode_from(std::string_view word) {
  if (word == "not") return Opcode::Not;
  if (word == "xor") return Opcode::Xor;
  if (word == "and") return Opcode::And;
  if (word == "or") return Opcode::Or;
  if (word == "gmul") return Opcode::Gmul;
  return std::nullopt;
}

bool is_keyword(std::string_view w) { return w == "in" || w == "out" || opcode_from(w).has_value(); }

}  // namespace

Program parse_program(std::string_view text, unsigned width) {
  std::vector<Input> inputs;
  std::vector<Instruction> instructions;
  std::vector<std::string> outputs;
  std::unordered_set<std::string> defined;

  auto expect_ident = [](const Token& t, std::size_t line, std::string_view what) {
    if (!is_ident_start(t.text[0]) || is_keyword(t.text))
      throw ParseError(line, t.column, "expected " + std::string(what) + ", got '" + t.text + "'");
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, eol - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::size_t spos = 0;
    while (spos <= line.size()) {
      std::size_t semi = line.find(';', spos);
      if (semi == std::string_view::npos) semi = line.size();
      const auto toks = tokenize(line.substr(spos, semi - spos), line_no, spos + 1);
      spos = semi + 1;
      if (toks.empty()) continue;

      const auto& head = toks[0];
      if (head.text == "in") {
        if (toks.size() != 3) throw ParseError(line_no, head.column, "expected `in <name> public|secret|random`");
        expect_ident(toks[1], line_no, "input name");
        InputKind kind;
        if (toks[2].text == "public") kind = InputKind::Public;
        else if (toks[2].text == "secret") kind = InputKind::Secret;
        else if (toks[2].text == "random") kind = InputKind::Random;
        else throw ParseError(line_no, toks[2].column, "unknown annotation '" + toks[2].text + "'");
        if (!defined.insert(toks[1].text).second)
          throw ParseError(line_no, toks[1].column, "duplicate definition of '" + toks[1].text + "'");
        inputs.push_back({toks[1].text, kind});
      } else if (head.text == "out") {
        bool want_name = true;
        for (std::size_t i = 1; i < toks.size(); ++i) {
          if (toks[i].text == ",") {
            if (want_name) throw ParseError(line_no, toks[i].column, "unexpected ','");
            want_name = true;
            continue;
          }
          expect_ident(toks[i], line_no, "output name");
          if (!defined.contains(toks[i].text))
            throw ParseError(line_no, toks[i].column, "output '" + toks[i].text + "' is not defined");
          outputs.push_back(toks[i].text);
          want_name = false;
        }
        if (want_name) throw ParseError(line_no, head.column, "expected output name");
      } else {
        expect_ident(head, line_no, "statement");
        if (toks.size() < 3 || toks[1].text != "=")
          throw ParseError(line_no, toks.size() > 1 ? toks[1].column : head.column, "expected '='");
        const auto op = opcode_from(toks[2].text);
        if (!op) throw ParseError(line_no, toks[2].column, "unknown operator '" + toks[2].text + "'");
        const std::size_t arity = is_unary(*op) ? 1 : 2;
        if (toks.size() != 3 + arity)
          throw ParseError(line_no, toks[2].column,
                           std::string(to_string(*op)) + " takes " + std::to_string(arity) + " operand(s)");
        if (*op == Opcode::Gmul && width != 8)
          throw ParseError(line_no, toks[2].column, "gmul requires word width 8");
        Instruction ins{head.text, *op, {}};
        for (std::size_t i = 3; i < toks.size(); ++i) {
          expect_ident(toks[i], line_no, "operand");
          if (!defined.contains(toks[i].text))
            throw ParseError(line_no, toks[i].column, "use of '" + toks[i].text + "' before definition");
          ins.operands.push_back(toks[i].text);
        }
        if (!defined.insert(head.text).second)
          throw ParseError(line_no, head.column, "duplicate definition of '" + head.text + "'");
        instructions.push_back(std::move(ins));
      }
    }
    pos = eol + 1;
  }
  if (width == 0 || width > 32) throw ParseError(1, 1, "word width must be in [1, 32]");
  return Program(std::move(inputs), std::move(instructions), std::move(outputs), width);
}

std::string to_text(const Program& p) {
  std::ostringstream os;
  for (const auto& in : p.inputs()) os << "in " << in.name << ' ' << to_string(in.kind) << '\n';
  for (const auto& ins : p.instructions()) {
    os << ins.dest << " = " << to_string(ins.op);
    for (const auto& o : ins.operands) os << ' ' << o;
    os << '\n';
  }
  if (!p.outputs().empty()) {
    os << "out ";
    for (std::size_t i = 0; i < p.outputs().size(); ++i) os << (i ? ", " : "") << p.outputs()[i];
    os << '\n';
  }
  return os.str();
}

}  // namespace leakguard
