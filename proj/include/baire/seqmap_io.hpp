#pragma once

// SeqMap files.
//
//   kind: table            kind: builtin
//   depth: 2               builtin zero_count_eq 1
//   branch: 2
//   extend: copy           (extend is optional; freeze by default)
//   [] -> []
//   [0] -> [1]
//   ...
//
// Blank lines and lines starting with '#' are ignored.

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "baire/builtins.hpp"
#include "baire/seqmap.hpp"
#include "baire/text.hpp"

namespace baire {

struct SeqMapFile {
  SeqMap map;
  std::optional<PointPredicate> ground_truth;  // built-in reductions only
};

namespace detail {

inline std::string header_value(Cursor& c, std::string_view key) {
  if (!c.consume_word(key)) c.fail("expected '" + std::string(key) + ":'");
  c.expect(':');
  return c.word();
}

inline Nat header_nat(Cursor& c, std::string_view key) {
  if (!c.consume_word(key)) c.fail("expected '" + std::string(key) + ":'");
  c.expect(':');
  Nat v = c.natural();
  c.expect_end();
  return v;
}

}  // namespace detail

inline SeqMapFile parse_seqmap(const std::string& text) {
  auto lines = content_lines(text);
  std::size_t i = 0;
  auto next = [&](const char* what) -> std::pair<std::size_t, std::string>& {
    if (i >= lines.size()) throw ParseError(std::string("unexpected end of file, expected ") + what, lines.empty() ? 1 : lines.back().first + 1, 1);
    return lines[i++];
  };

  auto& [kline, ktext] = next("kind");
  Cursor kc(ktext, kline);
  std::string kind = detail::header_value(kc, "kind");
  kc.expect_end();

  if (kind == "builtin") {
    auto& [bline, btext] = next("builtin line");
    Cursor bc(btext, bline);
    if (!bc.consume_word("builtin")) bc.fail("expected 'builtin <name> <params>'");
    std::string name = bc.word();
    std::vector<Nat> params;
    bc.skip_space();
    while (!bc.at_end()) {
      params.push_back(bc.natural());
      bc.skip_space();
    }
    if (i != lines.size()) throw ParseError("trailing content after builtin line", lines[i].first, 1);
    try {
      if (name == "shift") return {make_builtin_map(name, params), std::nullopt};
      auto b = make_builtin(name, params);
      return {b.reduction, b.ground_truth};
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), bline, 1);
    }
  }
  if (kind != "table") throw ParseError("unknown map kind '" + kind + "'", kline, 1);

  auto& [dline, dtext] = next("depth");
  Cursor dc(dtext, dline);
  auto depth = static_cast<std::size_t>(detail::header_nat(dc, "depth"));
  auto& [brline, brtext] = next("branch");
  Cursor brc(brtext, brline);
  Nat branch = detail::header_nat(brc, "branch");
  if (depth > 12 || branch == 0 || branch > 16) throw ParseError("table bounds out of range", brline, 1);

  auto ext = SeqMap::Extension::Freeze;
  if (i < lines.size() && lines[i].second.find("extend") != std::string::npos) {
    auto& [eline, etext] = lines[i++];
    Cursor ec(etext, eline);
    std::string e = detail::header_value(ec, "extend");
    ec.expect_end();
    if (e == "copy")
      ext = SeqMap::Extension::Copy;
    else if (e != "freeze")
      ec.fail("extend must be 'copy' or 'freeze'");
  }

  std::map<FinSeq, FinSeq> entries;
  for (; i < lines.size(); ++i) {
    Cursor c(lines[i].second, lines[i].first);
    FinSeq s = parse_finseq(c);
    if (!c.consume_word("->")) c.fail("expected '->'");
    FinSeq t = parse_finseq(c);
    c.expect_end();
    if (!entries.emplace(s, t).second) c.fail("duplicate entry for " + to_string(s));
  }
  try {
    return {SeqMap::table(std::move(entries), depth, branch, ext), std::nullopt};
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), lines.empty() ? 1 : lines.back().first, 1);
  }
}

inline std::string format_seqmap(const SeqMap& m) {
  std::ostringstream out;
  if (m.kind() == SeqMap::Kind::Builtin) {
    out << "kind: builtin\nbuiltin " << m.name();
    for (Nat p : m.params()) out << ' ' << p;
    out << '\n';
    return out.str();
  }
  const auto* table = m.table_entries();
  if (!table) throw std::invalid_argument("only table and builtin maps have a file form");
  out << "kind: table\ndepth: " << m.declared_depth() << "\nbranch: " << m.declared_branch() << "\nextend: "
      << (m.extension() == SeqMap::Extension::Copy ? "copy" : "freeze") << '\n';
  for (const auto& s : all_sequences_upto(m.declared_depth(), m.declared_branch()))
    out << to_string(s) << " -> " << to_string(table->at(s)) << '\n';
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SeqMapFile load_seqmap(const std::string& path) { return parse_seqmap(read_file(path)); }

}  // namespace baire
