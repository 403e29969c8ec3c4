#include "objlog/toplevel.hpp"

#include <istream>
#include <ostream>

namespace objlog {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Toplevel::Toplevel(Runtime& runtime, std::ostream& out) : rt_(runtime), out_(out) {}

void Toplevel::print_error(const Term& ball) {
  const Term& b = ball.deref();
  out_ << "Error: " << (b.is_compound(atoms::error, 2) ? "" : "unhandled exception ")
       << describe_exception(b, &rt_.engine().ops()) << '\n';
}

Toplevel::Outcome Toplevel::run(std::string_view query) {
  std::string text(trim(query));
  if (!text.empty() && text.back() == '.') text.pop_back();
  if (echo_) out_ << "?- " << text << ".\n";
  Engine& engine = rt_.engine();
  ReadTerm rt;
  try {
    rt = parse_term(text, engine.ops());
  } catch (const SyntaxError& e) {
    out_ << "Syntax error: " << e.message() << '\n';
    return Outcome::error;
  }

  WriteOptions opts;
  opts.quoted = true;
  opts.ops = &engine.ops();
  opts.var_names = &rt.variables;

  std::size_t base = engine.choicepoint_count();
  Query q(engine, rt.term, atoms::user);
  bool any = false;
  for (;;) {
    bool found;
    try {
      found = q.next();
    } catch (const PrologThrow& e) {
      out_.flush();
      print_error(e.ball());
      return Outcome::error;
    }
    if (!found) {
      out_ << "false.\n";
      out_.flush();
      return any ? Outcome::success : Outcome::failure;
    }
    any = true;
    std::string answer;
    for (const auto& [name, var] : rt.variables) {
      if (name.starts_with('_')) continue;
      Term value = resolve_bindings(var);
      const Term& v = value.deref();
      if (v.is_var() && v.node() == var.deref().node()) continue;
      if (!answer.empty()) answer += ",\n";
      answer += name + " = " + term_to_string(value, opts);
    }
    if (answer.empty()) answer = "true";
    bool alternatives = engine.choicepoint_count() > base + 1;
    if (alternatives && more_) {
      out_ << answer << " ";
      out_.flush();
      if (more_()) {
        out_ << ";\n";
        continue;
      }
    } else {
      out_ << answer;
    }
    out_ << ".\n";
    out_.flush();
    q.close();
    return Outcome::success;
  }
}

bool Toplevel::meta(std::string_view line) {
  std::string_view cmd = trim(line);
  if (cmd == ":objects") {
    out_ << rt_.kernel().dump_objects();
  } else if (cmd == ":stats") {
    out_ << rt_.stats_text();
  } else if (cmd == ":classes") {
    out_ << rt_.classes_text();
  } else if (cmd == ":audit") {
    AuditReport r = rt_.kernel().audit();
    for (const AuditEntry& e : r.mismatches)
      out_ << "@" << e.id << " stored=" << e.stored << " expected=" << e.expected << '\n';
    out_ << "mismatches: " << r.mismatches.size() << '\n' << "cyclic: " << r.cyclic.size() << '\n';
  } else if (cmd == ":help") {
    out_ << "Enter a query terminated by '.', or one of\n"
            "  :objects  object table\n"
            "  :stats    object, record and wrapper counters\n"
            "  :classes  class table\n"
            "  :audit    reference count audit\n";
  } else {
    return false;
  }
  out_.flush();
  return true;
}

int Toplevel::repl(std::istream& in, bool prompt) {
  int status = 0;
  std::string buffer, line;
  if (prompt) {
    set_more([&in, this] {
      std::string reply;
      if (!std::getline(in, reply)) return false;
      return trim(reply).starts_with(';');
    });
  }
  for (;;) {
    if (prompt) {
      out_ << (buffer.empty() ? "?- " : "|    ");
      out_.flush();
    }
    if (!std::getline(in, line)) break;
    if (buffer.empty()) {
      std::string_view t = trim(line);
      if (t.empty()) continue;
      if (t.front() == ':') {
        if (!meta(t)) out_ << "Unknown command " << t << " (try :help)\n";
        continue;
      }
    }
    buffer += line;
    buffer += '\n';
    std::string_view t = trim(buffer);
    if (t.empty() || t.back() != '.') continue;
    std::string query = std::move(buffer);
    buffer.clear();
    try {
      switch (run(query)) {
        case Outcome::success:
          status = 0;
          break;
        case Outcome::failure:
          status = 1;
          break;
        case Outcome::error:
          status = 2;
          break;
      }
    } catch (const HaltRequest& h) {
      return h.code;
    }
  }
  return status;
}

}  // namespace objlog
