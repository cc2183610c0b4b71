#include "leakguard/asm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

namespace leakguard {

AsmParseError::AsmParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::uint32_t AsmProgram::registers_used() const {
  std::uint32_t n = 0;
  for (const auto& ins : code)
    for (const auto* o : {&ins.dst, &ins.src})
      if (o->kind == Operand::Kind::PReg) n = std::max(n, o->id + 1);
  return n;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::uint32_t> number(std::string_view s) {
  std::uint32_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::uint32_t> slot_name(std::string_view s) {
  if (s.size() < 2 || s[0] != 's') return std::nullopt;
  return number(s.substr(1));
}

Operand operand(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    if (auto n = slot_name(trim(s.substr(1, s.size() - 2)))) return Operand::slot(*n);
  } else if (s.size() >= 2 && s[0] == 'r') {
    if (auto n = number(s.substr(1))) return Operand::preg(*n);
  }
  throw AsmParseError(line, "bad operand '" + std::string(s) + "'");
}

std::optional<MOpcode> mnemonic(std::string_view s) {
  for (auto op : {MOpcode::Mov, MOpcode::Xor, MOpcode::And, MOpcode::Or, MOpcode::Not, MOpcode::Gmul})
    if (s == to_string(op)) return op;
  return std::nullopt;
}

}  // namespace

AsmProgram parse_asm(std::string_view text) {
  AsmProgram out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;

    if (line.starts_with(";!")) {
      // ;! in|out <name> s<N>
      std::vector<std::string_view> words;
      std::string_view rest = trim(line.substr(2));
      while (!rest.empty()) {
        auto sp = std::find_if(rest.begin(), rest.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        words.push_back(rest.substr(0, static_cast<std::size_t>(sp - rest.begin())));
        rest = trim(rest.substr(static_cast<std::size_t>(sp - rest.begin())));
      }
      const auto slot = words.size() == 3 ? slot_name(words[2]) : std::nullopt;
      if (!slot || (words[0] != "in" && words[0] != "out"))
        throw AsmParseError(line_no, "expected `;! in|out <name> s<N>`");
      (words[0] == "in" ? out.inputs : out.outputs).push_back({std::string(words[1]), *slot});
      continue;
    }
    if (auto c = line.find(';'); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;

    const auto sp = line.find_first_of(" \t");
    const auto op = mnemonic(line.substr(0, sp));
    if (!op) throw AsmParseError(line_no, "unknown mnemonic '" + std::string(line.substr(0, sp)) + "'");
    const std::string_view args = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));

    MachineInstr ins{*op, {}, {}, kNoVar};
    const auto comma = args.find(',');
    if (*op == MOpcode::Not) {
      if (comma != std::string_view::npos || args.empty()) throw AsmParseError(line_no, "not takes one operand");
      ins.dst = operand(args, line_no);
    } else {
      if (comma == std::string_view::npos) throw AsmParseError(line_no, "expected two operands");
      ins.dst = operand(args.substr(0, comma), line_no);
      ins.src = operand(args.substr(comma + 1), line_no);
      if (ins.dst.is_mem() && ins.src.is_mem()) throw AsmParseError(line_no, "two memory operands");
    }
    out.code.push_back(ins);
  }
  return out;
}

}  // namespace leakguard
