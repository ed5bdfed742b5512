#include "atombench/structio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "atombench/elements.hpp"
#include "atombench/error.hpp"

namespace atombench {
namespace {

struct Line {
  std::size_t number;  // 1-based
  std::vector<std::string_view> tokens;
};

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<Line> split_lines(std::string_view text, bool skip_blank) {
  std::vector<Line> lines;
  std::size_t number = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    auto tokens = tokenize(text.substr(start, end - start));
    if (!(skip_blank && tokens.empty())) lines.push_back({number, std::move(tokens)});
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

double to_double(std::string_view tok, std::size_t line) {
  double v = 0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(line, fmt::format("expected a number, got '{}'", tok));
  return v;
}

long to_count(std::string_view tok, std::size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0)
    throw ParseError(line, fmt::format("expected a positive count, got '{}'", tok));
  return v;
}

Vec3 three_numbers(const Line& line, std::size_t from = 0) {
  if (line.tokens.size() < from + 3)
    throw ParseError(line.number, "expected three numbers");
  return {to_double(line.tokens[from], line.number), to_double(line.tokens[from + 1], line.number),
          to_double(line.tokens[from + 2], line.number)};
}

// POTCAR-style decorations: "Nb_pv", "Fe/3a1b2c".
std::string_view strip_potcar_suffix(std::string_view sym) {
  const auto cut = sym.find_first_of("_/");
  return cut == std::string_view::npos ? sym : sym.substr(0, cut);
}

bool looks_numeric(std::string_view tok) {
  return !tok.empty() && (std::isdigit(static_cast<unsigned char>(tok.front())) ||
                          tok.front() == '-' || tok.front() == '+' || tok.front() == '.');
}

}  // namespace

std::string fixed6(double x) {
  std::string s = fmt::format("{:.6f}", x);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

Crystal parse_poscar(std::string_view text, std::string provenance) {
  const auto lines = split_lines(text, /*skip_blank=*/false);
  auto need = [&](std::size_t idx, const char* what) -> const Line& {
    if (idx >= lines.size() || lines[idx].tokens.empty())
      throw ParseError(idx + 1, fmt::format("missing {}", what));
    return lines[idx];
  };

  const Line& scale_line = need(1, "scaling factor");
  const double scale = to_double(scale_line.tokens[0], scale_line.number);
  if (scale == 0) throw ParseError(scale_line.number, "scaling factor is zero");

  Mat3 rows{};
  for (int i = 0; i < 3; ++i) rows[i] = three_numbers(need(2 + i, "lattice vector"));

  const Line& sym_line = need(5, "element-symbol line");
  if (looks_numeric(sym_line.tokens[0]))
    throw UnsupportedFormat(
        fmt::format("line {}: POSCAR without an element-symbol line", sym_line.number));
  std::vector<std::string> symbols;
  for (auto tok : sym_line.tokens) {
    const auto sym = strip_potcar_suffix(tok);
    if (!is_element(sym))
      throw ParseError(sym_line.number, fmt::format("unknown element '{}'", tok));
    symbols.emplace_back(sym);
  }

  const Line& count_line = need(6, "counts line");
  if (count_line.tokens.size() != symbols.size())
    throw ParseError(count_line.number,
                     fmt::format("{} counts for {} element symbols", count_line.tokens.size(),
                                 symbols.size()));
  std::vector<long> counts;
  for (auto tok : count_line.tokens) counts.push_back(to_count(tok, count_line.number));

  std::size_t idx = 7;
  const Line* mode = &need(idx, "coordinate mode line");
  if (mode->tokens[0].front() == 'S' || mode->tokens[0].front() == 's')
    mode = &need(++idx, "coordinate mode line");
  const char m = mode->tokens[0].front();
  if (m == 'C' || m == 'c' || m == 'K' || m == 'k')
    throw UnsupportedFormat(fmt::format(
        "line {}: Cartesian POSCAR coordinates are not supported", mode->number));
  if (m != 'D' && m != 'd')
    throw ParseError(mode->number,
                     fmt::format("unknown coordinate mode '{}'", mode->tokens[0]));

  std::vector<std::string> species;
  std::vector<Vec3> frac;
  for (std::size_t s = 0; s < symbols.size(); ++s)
    for (long k = 0; k < counts[s]; ++k) {
      species.push_back(symbols[s]);
      frac.push_back(three_numbers(need(++idx, "atomic position")));
    }

  if (scale < 0) {
    // Negative scale is the target cell volume.
    const double vol = std::abs(det(rows));
    if (vol < 1e-12) throw DegenerateCell("lattice volume is zero");
    const double f = std::cbrt(-scale / vol);
    for (auto& r : rows) r = f * r;
  } else {
    for (auto& r : rows) r = scale * r;
  }
  return Crystal(std::move(species), std::move(frac), LatticeMatrix(rows),
                 std::move(provenance));
}

std::string write_poscar(const Crystal& c) {
  std::vector<std::string> order;
  for (const auto& s : c.species())
    if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);

  std::string out = reduced_formula(c.species()) + "\n1.0\n";
  for (const auto& row : c.lattice().rows())
    out += fmt::format("  {} {} {}\n", fixed6(row[0]), fixed6(row[1]), fixed6(row[2]));
  std::string syms, counts;
  for (const auto& el : order) {
    syms += (syms.empty() ? "" : " ") + el;
    const auto n = std::count(c.species().begin(), c.species().end(), el);
    counts += (counts.empty() ? "" : " ") + std::to_string(n);
  }
  out += syms + "\n" + counts + "\nDirect\n";
  auto coord = [](double x) {
    std::string s = fixed6(x);
    return s == "1.000000" ? std::string("0.000000") : s;
  };
  for (const auto& el : order)
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c.species()[i] == el) {
        const auto& f = c.frac_coords()[i];
        out += fmt::format("  {} {} {}\n", coord(f[0]), coord(f[1]), coord(f[2]));
      }
  return out;
}

Crystal parse_atomgpt_block(std::string_view text, std::string provenance) {
  const auto lines = split_lines(text, /*skip_blank=*/true);
  if (lines.size() < 3)
    throw ParseError(lines.empty() ? 0 : lines.back().number,
                     "expected lengths, angles and at least one site line");
  auto exactly = [](const Line& l, std::size_t n, const char* what) {
    if (l.tokens.size() != n)
      throw ParseError(l.number, fmt::format("expected {} tokens for {}, got {}", n, what,
                                             l.tokens.size()));
  };
  exactly(lines[0], 3, "lattice lengths");
  exactly(lines[1], 3, "lattice angles");
  const Vec3 len = three_numbers(lines[0]);
  const Vec3 ang = three_numbers(lines[1]);

  std::vector<std::string> species;
  std::vector<Vec3> frac;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const Line& l = lines[i];
    exactly(l, 4, "a site");
    if (!is_element(l.tokens[0]))
      throw ParseError(l.number, fmt::format("unknown element '{}'", l.tokens[0]));
    species.emplace_back(l.tokens[0]);
    frac.push_back(three_numbers(l, 1));
  }
  const LatticeParams p{len[0], len[1], len[2], ang[0], ang[1], ang[2]};
  return Crystal(std::move(species), std::move(frac), params_to_matrix(p),
                 std::move(provenance));
}

std::string write_atomgpt_block(const Crystal& c) {
  const LatticeParams p = c.params();
  std::string out = fmt::format("{} {} {}\n{} {} {}\n", fixed6(p.a), fixed6(p.b), fixed6(p.c),
                                fixed6(p.alpha), fixed6(p.beta), fixed6(p.gamma));
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& f = c.frac_coords()[i];
    out += fmt::format("{} {} {} {}\n", c.species()[i], fixed6(f[0]), fixed6(f[1]),
                       fixed6(f[2]));
  }
  return out;
}

}  // namespace atombench
