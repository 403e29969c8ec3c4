#include "objlog/syntax.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace objlog {

// ---------------------------------------------------------------------------
// Operators

OperatorTable OperatorTable::standard() {
  OperatorTable t;
  auto add = [&](int p, OpType type, std::initializer_list<const char*> names) {
    for (const char* n : names) t.add(p, type, Symbol(n));
  };
  add(1200, OpType::xfx, {":-", "-->", ":->", ":<-"});
  add(1200, OpType::fx, {":-", "?-"});
  add(1150, OpType::xfx, {"::"});
  add(1150, OpType::fx, {"dynamic", "multifile", "discontiguous"});
  add(1100, OpType::xfy, {";", "|"});
  add(1050, OpType::xfy, {"->", "*->"});
  add(1000, OpType::xfy, {","});
  add(900, OpType::fy, {"\\+"});
  add(700, OpType::xfx,
      {"=", "\\=", "==", "\\==", "@<", "@>", "@=<", "@>=", "=..", "is", "=:=", "=\\=", "<", ">",
       "=<", ">="});
  add(600, OpType::xfy, {":"});
  add(500, OpType::yfx, {"+", "-", "/\\", "\\/", "xor"});
  add(400, OpType::yfx, {"*", "/", "//", "rem", "mod", "div", "<<", ">>"});
  add(200, OpType::xfx, {"**"});
  add(200, OpType::xfy, {"^"});
  add(200, OpType::fy, {"-", "+", "\\"});
  add(100, OpType::fx, {"@"});
  return t;
}

void OperatorTable::add(int priority, OpType type, Symbol name) {
  auto& table = (type == OpType::fy || type == OpType::fx)   ? prefix_
                : (type == OpType::xf || type == OpType::yf) ? postfix_
                                                             : infix_;
  if (priority == 0)
    table.erase(name);
  else
    table[name] = OpDef{priority, type};
}

std::optional<OpDef> OperatorTable::prefix(Symbol name) const {
  auto it = prefix_.find(name);
  return it == prefix_.end() ? std::nullopt : std::optional(it->second);
}
std::optional<OpDef> OperatorTable::infix(Symbol name) const {
  auto it = infix_.find(name);
  return it == infix_.end() ? std::nullopt : std::optional(it->second);
}
std::optional<OpDef> OperatorTable::postfix(Symbol name) const {
  auto it = postfix_.find(name);
  return it == postfix_.end() ? std::nullopt : std::optional(it->second);
}
bool OperatorTable::is_op(Symbol name) const {
  return prefix_.count(name) || infix_.count(name) || postfix_.count(name);
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

bool is_symbol_char(char c) {
  switch (c) {
    case '#': case '$': case '&': case '*': case '+': case '-': case '.': case '/':
    case ':': case '<': case '=': case '>': case '?': case '@': case '^': case '~':
    case '\\':
      return true;
    default:
      return false;
  }
}
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

enum class Tok { Name, Quoted, Var, Int, Float, String, Punct, End, Eof };

}  // namespace

struct Reader::Token {
  Tok kind = Tok::Eof;
  std::string text;  // names, vars, strings, punctuation
  std::int64_t ival = 0;
  double fval = 0;
  bool layout_before = false;
  int line = 1;
};

namespace {

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t& pos, int& line) : s_(text), pos_(pos), line_(line) {}

  Reader::Token next();

 private:
  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, line_); }
  char peek(std::size_t k = 0) const { return pos_ + k < s_.size() ? s_[pos_ + k] : '\0'; }
  bool at_end() const { return pos_ >= s_.size(); }
  char get() {
    char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  bool skip_layout();
  int read_escape(char quote);
  std::string read_quoted(char quote);
  Reader::Token read_number();

  std::string_view s_;
  std::size_t& pos_;
  int& line_;
};

bool Lexer::skip_layout() {
  bool skipped = false;
  while (!at_end()) {
    char c = peek();
    if (std::isspace(static_cast<unsigned char>(c))) {
      get();
      skipped = true;
    } else if (c == '%') {
      while (!at_end() && peek() != '\n') get();
      skipped = true;
    } else if (c == '/' && peek(1) == '*') {
      get();
      get();
      while (!at_end() && !(peek() == '*' && peek(1) == '/')) get();
      if (at_end()) fail("unterminated block comment");
      get();
      get();
      skipped = true;
    } else {
      break;
    }
  }
  return skipped;
}

int Lexer::read_escape(char quote) {
  // Called after the backslash.
  if (at_end()) fail("unterminated escape sequence");
  char c = get();
  switch (c) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case 'a': return '\a';
    case 'b': return '\b';
    case 'f': return '\f';
    case 'v': return '\v';
    case 'e': return 27;
    case 's': return ' ';
    case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': {
      int v = c - '0';
      while (peek() >= '0' && peek() <= '7') v = v * 8 + (get() - '0');
      if (peek() == '\\') get();
      return v;
    }
    case 'x': {
      int v = 0;
      while (std::isxdigit(static_cast<unsigned char>(peek()))) {
        char h = get();
        v = v * 16 + (is_digit(h) ? h - '0' : (std::tolower(h) - 'a' + 10));
      }
      if (peek() == '\\') get();
      return v;
    }
    case '\n':
      return -1;  // line continuation
    case '\\': case '\'': case '"': case '`':
      return c;
    default:
      if (c == quote) return c;
      fail(std::string("undefined escape sequence \\") + c);
  }
}

std::string Lexer::read_quoted(char quote) {
  std::string out;
  for (;;) {
    if (at_end()) fail("unterminated quoted text");
    char c = get();
    if (c == quote) {
      if (peek() == quote) {
        get();
        out.push_back(quote);
        continue;
      }
      return out;
    }
    if (c == '\\') {
      int e = read_escape(quote);
      if (e >= 0) out.push_back(static_cast<char>(e));
      continue;
    }
    out.push_back(c);
  }
}

Reader::Token Lexer::read_number() {
  Reader::Token t;
  std::size_t start = pos_;
  if (peek() == '0' && peek(1) == '\'') {
    get();
    get();
    if (at_end()) fail("unterminated character code");
    char c = get();
    int code;
    if (c == '\\') {
      code = read_escape('\'');
    } else if (c == '\'' && peek() == '\'') {
      get();
      code = '\'';
    } else {
      code = static_cast<unsigned char>(c);
    }
    t.kind = Tok::Int;
    t.ival = code;
    return t;
  }
  if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'o' || peek(1) == 'b')) {
    int base = peek(1) == 'x' ? 16 : peek(1) == 'o' ? 8 : 2;
    std::size_t digits = pos_ + 2;
    auto valid = [&](char c) {
      if (base == 16) return std::isxdigit(static_cast<unsigned char>(c)) != 0;
      return c >= '0' && c < static_cast<char>('0' + base);
    };
    if (digits < s_.size() && valid(s_[digits])) {
      get();
      get();
      std::size_t b = pos_;
      while (valid(peek())) get();
      std::int64_t v = 0;
      auto r = std::from_chars(s_.data() + b, s_.data() + pos_, v, base);
      if (r.ec != std::errc()) fail("integer out of range");
      t.kind = Tok::Int;
      t.ival = v;
      return t;
    }
  }
  while (is_digit(peek())) get();
  bool is_float = false;
  if (peek() == '.' && is_digit(peek(1))) {
    is_float = true;
    get();
    while (is_digit(peek())) get();
  }
  if ((peek() == 'e' || peek() == 'E') &&
      (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
    is_float = true;
    get();
    if (peek() == '+' || peek() == '-') get();
    while (is_digit(peek())) get();
  }
  std::string text(s_.substr(start, pos_ - start));
  if (is_float) {
    t.kind = Tok::Float;
    t.fval = std::strtod(text.c_str(), nullptr);
  } else {
    t.kind = Tok::Int;
    auto r = std::from_chars(text.data(), text.data() + text.size(), t.ival);
    if (r.ec != std::errc()) fail("integer out of range: " + text);
  }
  return t;
}

Reader::Token Lexer::next() {
  bool layout = skip_layout();
  Reader::Token t;
  t.layout_before = layout;
  t.line = line_;
  if (at_end()) {
    t.kind = Tok::Eof;
    return t;
  }
  char c = peek();
  if (is_digit(c)) {
    Reader::Token n = read_number();
    n.layout_before = layout;
    n.line = t.line;
    return n;
  }
  if (is_upper(c)) {
    std::size_t b = pos_;
    while (is_alnum(peek())) get();
    t.kind = Tok::Var;
    t.text = std::string(s_.substr(b, pos_ - b));
    return t;
  }
  if (is_lower(c)) {
    std::size_t b = pos_;
    while (is_alnum(peek())) get();
    t.kind = Tok::Name;
    t.text = std::string(s_.substr(b, pos_ - b));
    return t;
  }
  if (c == '\'') {
    get();
    t.kind = Tok::Quoted;
    t.text = read_quoted('\'');
    return t;
  }
  if (c == '"') {
    get();
    t.kind = Tok::String;
    t.text = read_quoted('"');
    return t;
  }
  if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == ',' ||
      c == '|') {
    get();
    if (c == '|' && peek() == '|') {
      get();
      t.kind = Tok::Name;
      t.text = "||";
      return t;
    }
    t.kind = Tok::Punct;
    t.text = std::string(1, c);
    return t;
  }
  if (c == '!' || c == ';') {
    get();
    t.kind = Tok::Name;
    t.text = std::string(1, c);
    return t;
  }
  if (c == '.') {
    char n = peek(1);
    if (n == '\0' || std::isspace(static_cast<unsigned char>(n)) || n == '%') {
      get();
      t.kind = Tok::End;
      return t;
    }
  }
  if (is_symbol_char(c)) {
    std::size_t b = pos_;
    while (is_symbol_char(peek())) get();
    t.kind = Tok::Name;
    t.text = std::string(s_.substr(b, pos_ - b));
    return t;
  }
  fail(std::string("unexpected character '") + c + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Parser

class Reader::Parser {
 public:
  Parser(std::vector<Token> tokens, const OperatorTable& ops) : toks_(std::move(tokens)), ops_(ops) {}

  ReadTerm parse_clause() {
    ReadTerm r;
    r.line = toks_.empty() ? 1 : toks_.front().line;
    int prec = 0;
    r.term = parse(1200, prec, 0);
    if (cur().kind != Tok::End && cur().kind != Tok::Eof) fail("operator expected");
    r.variables = std::move(vars_);
    return r;
  }

 private:
  static constexpr int kMaxNesting = 5000;

  // Inside argument lists and list elements a bare comma or bar ends the
  // element; the element itself may use any operator priority.
  struct ArgMode {
    ArgMode(Parser& p, bool on) : p_(p), saved_(p.in_args_) { p.in_args_ = on; }
    ~ArgMode() { p_.in_args_ = saved_; }
    Parser& p_;
    bool saved_;
  };

  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, cur().line); }
  bool is_punct(const Token& t, char c) const {
    return t.kind == Tok::Punct && t.text.size() == 1 && t.text[0] == c;
  }
  void expect(char c) {
    if (!is_punct(cur(), c)) fail(std::string("expected '") + c + "'");
    advance();
  }

  // Whether the token can begin a term (used to decide if a prefix
  // operator is applied or stands alone as an atom).
  bool starts_term(const Token& t) const {
    switch (t.kind) {
      case Tok::Name:
      case Tok::Quoted:
      case Tok::Var:
      case Tok::Int:
      case Tok::Float:
      case Tok::String:
        return true;
      case Tok::Punct:
        return is_punct(t, '(') || is_punct(t, '[') || is_punct(t, '{');
      default:
        return false;
    }
  }

  Term variable(const std::string& name) {
    if (name == "_") return Term::fresh_var();
    for (auto& [n, v] : vars_)
      if (n == name) return v;
    Term v = Term::fresh_var();
    vars_.emplace_back(name, v);
    return v;
  }

  Term parse_arglist(Symbol functor, int depth) {
    // Current token is the '(' right after the functor name.
    advance();
    std::vector<Term> args;
    ArgMode guard(*this, true);
    for (;;) {
      int p = 0;
      args.push_back(parse(1200, p, depth + 1));
      if (is_punct(cur(), ',')) {
        advance();
        continue;
      }
      expect(')');
      break;
    }
    return Term::compound(functor, std::move(args));
  }

  Term parse_list(int depth) {
    // After '['.
    std::vector<Term> elems;
    Term tail = Term::atom(atoms::nil);
    ArgMode guard(*this, true);
    for (;;) {
      int p = 0;
      elems.push_back(parse(1200, p, depth + 1));
      if (is_punct(cur(), ',')) {
        advance();
        continue;
      }
      if (is_punct(cur(), '|')) {
        advance();
        tail = parse(1200, p, depth + 1);
      }
      expect(']');
      break;
    }
    return make_list(elems, tail);
  }

  Term parse_primary(int max_prec, int& out_prec, int depth) {
    if (depth > kMaxNesting) fail("term nesting too deep");
    const Token t = cur();
    out_prec = 0;
    switch (t.kind) {
      case Tok::Int:
        advance();
        return Term::integer(t.ival);
      case Tok::Float:
        advance();
        return Term::real(t.fval);
      case Tok::Var:
        advance();
        return variable(t.text);
      case Tok::String:
        advance();
        return Term::atom(Symbol(t.text));
      case Tok::Punct: {
        if (is_punct(t, '(')) {
          advance();
          ArgMode guard(*this, false);
          int p = 0;
          Term inner = parse(1200, p, depth + 1);
          expect(')');
          return inner;
        }
        if (is_punct(t, '[')) {
          advance();
          if (is_punct(cur(), ']')) {
            advance();
            return atom_or_compound(atoms::nil, max_prec, out_prec, depth);
          }
          return parse_list(depth);
        }
        if (is_punct(t, '{')) {
          advance();
          if (is_punct(cur(), '}')) {
            advance();
            return atom_or_compound(atoms::curly, max_prec, out_prec, depth);
          }
          ArgMode guard(*this, false);
          int p = 0;
          Term inner = parse(1200, p, depth + 1);
          expect('}');
          return Term::compound(atoms::curly, {inner});
        }
        fail("unexpected '" + t.text + "'");
      }
      case Tok::Name:
      case Tok::Quoted: {
        advance();
        Symbol name(t.text);
        const Token& next = cur();
        if (is_punct(next, '(') && !next.layout_before) return parse_arglist(name, depth);
        if (t.kind == Tok::Name && name == atoms::minus && !next.layout_before) {
          if (next.kind == Tok::Int) {
            advance();
            return Term::integer(-next.ival);
          }
          if (next.kind == Tok::Float) {
            advance();
            return Term::real(-next.fval);
          }
        }
        if (t.kind == Tok::Name) {
          if (auto op = ops_.prefix(name); op && starts_term(next) && !infix_only(next)) {
            int p = op->priority;
            if (p > max_prec) p = 999;
            int arg_max = op->type == OpType::fy ? p : p - 1;
            int ap = 0;
            Term arg = parse(arg_max, ap, depth + 1);
            out_prec = p;
            if (name == atoms::at && arg.is_int()) return Term::object(arg.int_value());
            return Term::compound(name, {arg});
          }
        }
        return Term::atom(name);
      }
      case Tok::End:
        fail("unexpected end of clause");
      case Tok::Eof:
        fail("unexpected end of file");
    }
    fail("unexpected token");
  }

  Term atom_or_compound(Symbol name, int, int&, int depth) {
    if (is_punct(cur(), '(') && !cur().layout_before) return parse_arglist(name, depth);
    return Term::atom(name);
  }

  // An infix-only operator name following a prefix operator means the
  // prefix operator is an atom operand (as in "- = x").
  bool infix_only(const Token& t) const {
    if (t.kind != Tok::Name) return false;
    Symbol s(t.text);
    if (!ops_.infix(s) || ops_.prefix(s)) return false;
    const Token& after = ahead();
    if (is_punct(after, '(') && !after.layout_before) return false;
    return true;
  }

  Term parse(int max_prec, int& out_prec, int depth) {
    int left_prec = 0;
    Term left = parse_primary(max_prec, left_prec, depth);
    for (;;) {
      const Token& t = cur();
      Symbol name;
      if (t.kind == Tok::Name) {
        name = Symbol(t.text);
      } else if (in_args_ && (is_punct(t, ',') || is_punct(t, '|'))) {
        break;
      } else if (is_punct(t, ',')) {
        name = atoms::comma;
      } else if (is_punct(t, '|')) {
        name = atoms::bar;
      } else {
        break;
      }
      if (auto op = ops_.infix(name); op && op->priority <= max_prec) {
        int p = op->priority;
        int left_max = op->type == OpType::yfx ? p : p - 1;
        int right_max = op->type == OpType::xfy ? p : p - 1;
        if (left_prec <= left_max) {
          advance();
          int rp = 0;
          Term right = parse(right_max, rp, depth + 1);
          Symbol functor = name == atoms::bar ? atoms::semicolon : name;
          left = Term::compound(functor, {left, right});
          left_prec = p;
          continue;
        }
      }
      if (auto op = ops_.postfix(name); op && op->priority <= max_prec) {
        int p = op->priority;
        int left_max = op->type == OpType::yf ? p : p - 1;
        if (left_prec <= left_max) {
          advance();
          left = Term::compound(name, {left});
          left_prec = p;
          continue;
        }
      }
      break;
    }
    out_prec = left_prec;
    return left;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const OperatorTable& ops_;
  std::vector<std::pair<std::string, Term>> vars_;
  bool in_args_ = false;
};

Reader::Reader(std::string_view text, const OperatorTable& ops) : text_(text), ops_(ops) {}

std::optional<ReadTerm> Reader::next() {
  at_end_ = false;
  Lexer lex(text_, pos_, line_);
  std::vector<Token> toks;
  for (;;) {
    Token t = lex.next();
    if (t.kind == Tok::Eof) {
      if (toks.empty()) return std::nullopt;
      throw SyntaxError("operator expected (clause not terminated by '.')", t.line);
    }
    bool end = t.kind == Tok::End;
    toks.push_back(std::move(t));
    if (end) break;
  }
  at_end_ = true;
  Parser p(std::move(toks), ops_);
  return p.parse_clause();
}

void Reader::recover() {
  // A parse error leaves the input past the offending clause already;
  // a token error needs a skip to the next full stop followed by layout.
  if (at_end_) return;
  Lexer lex(text_, pos_, line_);
  for (;;) {
    try {
      Token t = lex.next();
      if (t.kind == Tok::End || t.kind == Tok::Eof) return;
    } catch (const SyntaxError&) {
      if (pos_ < text_.size()) ++pos_;
    }
  }
}

ReadTerm parse_term(std::string_view text, const OperatorTable& ops) {
  std::size_t pos = 0;
  int line = 1;
  Lexer lex(text, pos, line);
  std::vector<Reader::Token> toks;
  for (;;) {
    Reader::Token t = lex.next();
    bool stop = t.kind == Tok::End || t.kind == Tok::Eof;
    toks.push_back(std::move(t));
    if (stop) break;
  }
  if (toks.back().kind == Tok::End) {
    Reader::Token extra = lex.next();
    if (extra.kind != Tok::Eof) throw SyntaxError("text after end of term", extra.line);
  }
  Reader::Parser p(std::move(toks), ops);
  return p.parse_clause();
}

ReadTerm parse_term(std::string_view text) {
  static const OperatorTable ops = OperatorTable::standard();
  return parse_term(text, ops);
}

// ---------------------------------------------------------------------------
// Writer

std::string quote_atom_if_needed(std::string_view name) {
  auto plain = [&] {
    if (name.empty()) return false;
    if (name == "[]" || name == "{}" || name == "!" || name == ";") return true;
    if (is_lower(name[0])) {
      for (char c : name)
        if (!is_alnum(c)) return false;
      return true;
    }
    for (char c : name)
      if (!is_symbol_char(c)) return false;
    return true;
  };
  if (plain()) return std::string(name);
  std::string out = "'";
  for (char c : name) {
    switch (c) {
      case '\'': out += "\\'"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

namespace {

class Writer {
 public:
  Writer(const WriteOptions& o, const OperatorTable& ops) : opt_(o), ops_(ops) {
    if (o.var_names)
      for (auto& [n, v] : *o.var_names) {
        const Term& d = v.deref();
        if (d.is_var()) names_.emplace(d.var_node(), n);
      }
  }

  void write(const Term& raw, int prec, std::size_t depth) {
    const Term& t = raw.deref();
    if (depth > opt_.max_depth) {
      emit("...");
      return;
    }
    switch (t.tag()) {
      case Tag::Var: {
        auto it = names_.find(t.var_node());
        emit(it != names_.end() ? it->second : "_G" + std::to_string(t.var_node()->stamp()));
        return;
      }
      case Tag::Int:
        emit(std::to_string(t.int_value()));
        return;
      case Tag::Float:
        emit(format_float(t.float_value()));
        return;
      case Tag::Atom:
        write_atom(t.symbol(), prec);
        return;
      case Tag::Obj:
        emit("@" + std::to_string(t.object_id()));
        return;
      case Tag::Slot:
        emit("_S" + std::to_string(t.slot_index()));
        return;
      case Tag::Compound:
        write_compound(t, prec, depth);
        return;
      case Tag::Empty:
        emit("<empty>");
        return;
    }
  }

  std::string take() { return std::move(out_); }

 private:
  static std::string format_float(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
      std::snprintf(buf, sizeof buf, "%.*g", prec, v);
      if (std::strtod(buf, nullptr) == v) break;
    }
    std::string s(buf);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    else if (s.find('.') == std::string::npos) {
      auto e = s.find('e');
      s.insert(e, ".0");
    }
    return s;
  }

  void emit(std::string_view tok) {
    if (!out_.empty() && !tok.empty()) {
      char a = out_.back(), b = tok.front();
      if ((is_symbol_char(a) && is_symbol_char(b)) || (is_alnum(a) && is_alnum(b)) ||
          (a == ',' && !opt_.quoted && false))
        out_.push_back(' ');
    }
    out_.append(tok);
  }

  std::string atom_text(Symbol s) const {
    return opt_.quoted ? quote_atom_if_needed(s.name()) : std::string(s.name());
  }

  void write_atom(Symbol s, int prec) {
    std::string text = atom_text(s);
    if (prec < 1200 && ops_.is_op(s) && s != atoms::nil) {
      int p = 0;
      if (auto o = ops_.infix(s)) p = std::max(p, o->priority);
      if (auto o = ops_.prefix(s)) p = std::max(p, o->priority);
      if (p > prec) {
        emit("(");
        emit(text);
        emit(")");
        return;
      }
    }
    emit(text);
  }

  void write_args(const Term& t, std::size_t depth) {
    emit(atom_text(t.symbol()));
    out_.push_back('(');
    for (std::uint32_t i = 0; i < t.arity(); ++i) {
      if (i) out_.push_back(',');
      write(t.arg(i), 999, depth + 1);
    }
    out_.push_back(')');
  }

  void write_compound(const Term& t, int prec, std::size_t depth) {
    Symbol f = t.symbol();
    std::uint32_t n = t.arity();
    if (f == atoms::dot && n == 2) {
      emit("[");
      write(t.arg(0), 999, depth + 1);
      const Term* tail = &t.arg(1).deref();
      std::size_t count = 0;
      while (tail->is_compound(atoms::dot, 2)) {
        out_.push_back(',');
        if (++count > opt_.max_depth * 100) {
          emit("...");
          break;
        }
        write(tail->arg(0), 999, depth + 1);
        tail = &tail->arg(1).deref();
      }
      if (!tail->is_atom(atoms::nil)) {
        out_.push_back('|');
        write(*tail, 999, depth + 1);
      }
      out_.push_back(']');
      return;
    }
    if (f == atoms::curly && n == 1) {
      emit("{");
      write(t.arg(0), 1200, depth + 1);
      out_.push_back('}');
      return;
    }
    if (n == 2) {
      if (auto op = ops_.infix(f)) {
        int p = op->priority;
        int lp = op->type == OpType::yfx ? p : p - 1;
        int rp = op->type == OpType::xfy ? p : p - 1;
        bool open = p > prec;
        if (open) emit("(");
        write(t.arg(0), lp, depth + 1);
        if (f == atoms::comma) {
          out_.push_back(',');
        } else {
          std::string text = atom_text(f);
          bool alpha = is_alnum(text.front());
          bool spaced = alpha || f == atoms::neck || f == atoms::arrow || f == atoms::semicolon ||
                        f == atoms::send_arrow || f == atoms::get_arrow || f == atoms::doc_sep ||
                        f == atoms::soft_arrow;
          if (spaced) out_.push_back(' ');
          emit(text);
          if (spaced) out_.push_back(' ');
        }
        write(t.arg(1), rp, depth + 1);
        if (open) emit(")");
        return;
      }
    }
    if (n == 1) {
      if (auto op = ops_.prefix(f); op && f != atoms::minus && f != atoms::plus ? true
                                       : op && !t.arg(0).deref().is_number()) {
        int p = op->priority;
        int ap = op->type == OpType::fy ? p : p - 1;
        bool open = p > prec;
        if (open) emit("(");
        std::string text = atom_text(f);
        emit(text);
        const Term& a = t.arg(0).deref();
        bool need_space = is_alnum(text.back()) ||
                          (a.is_atom() && ops_.is_op(a.symbol())) ||
                          (a.is_compound() && [&] {
                            // an operand that will print with a leading '('
                            if (auto io = ops_.infix(a.symbol()); io && a.arity() == 2)
                              return io->priority > ap;
                            if (auto po = ops_.prefix(a.symbol()); po && a.arity() == 1)
                              return po->priority > ap;
                            return false;
                          }());
        if (need_space) out_.push_back(' ');
        write(a, ap, depth + 1);
        if (open) emit(")");
        return;
      }
      if (auto op = ops_.postfix(f)) {
        int p = op->priority;
        int ap = op->type == OpType::yf ? p : p - 1;
        bool open = p > prec;
        if (open) emit("(");
        write(t.arg(0), ap, depth + 1);
        emit(atom_text(f));
        if (open) emit(")");
        return;
      }
    }
    write_args(t, depth);
  }

  const WriteOptions& opt_;
  const OperatorTable& ops_;
  std::unordered_map<const VarNode*, std::string> names_;
  std::string out_;
};

}  // namespace

std::string term_to_string(const Term& t, const WriteOptions& options) {
  static const OperatorTable standard = OperatorTable::standard();
  Writer w(options, options.ops ? *options.ops : standard);
  w.write(t, 1200, 0);
  return w.take();
}

}  // namespace objlog
