#include "pplab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pplab/error.hpp"

namespace pplab {

namespace {

[[noreturn]] void parse_fail(const std::string& src, int line, int col, const std::string& msg) {
    fail("config-parse", src + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

struct Cursor {
    const std::string& s;
    std::size_t i = 0;
    int line;
    const std::string& src;

    bool done() const { return i >= s.size(); }
    char peek() const { return done() ? '\0' : s[i]; }
    void skip_ws() {
        while (!done() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }
    int col() const { return static_cast<int>(i) + 1; }
};

double parse_number_token(Cursor& c, const std::string& tok) {
    if (tok == "inf" || tok == "Inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        parse_fail(c.src, c.line, c.col(), "expected a number, got '" + tok + "'");
    }
}

ConfigValue parse_value(Cursor& c) {
    c.skip_ws();
    ConfigValue v;
    v.line = c.line;
    if (c.done() || c.peek() == '#') parse_fail(c.src, c.line, c.col(), "missing value");

    if (c.peek() == '"') {
        ++c.i;
        std::string out;
        while (!c.done() && c.peek() != '"') out.push_back(c.s[c.i++]);
        if (c.done()) parse_fail(c.src, c.line, c.col(), "unterminated string");
        ++c.i;
        v.kind = ConfigValue::Kind::String;
        v.text = out;
        return v;
    }
    if (c.peek() == '[') {
        ++c.i;
        v.kind = ConfigValue::Kind::List;
        for (;;) {
            c.skip_ws();
            if (c.peek() == ']') {
                ++c.i;
                break;
            }
            std::string tok;
            while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != ' ' &&
                   c.peek() != '\t')
                tok.push_back(c.s[c.i++]);
            if (tok.empty()) parse_fail(c.src, c.line, c.col(), "bad list element");
            v.list.push_back(parse_number_token(c, tok));
            c.skip_ws();
            if (c.peek() == ',') ++c.i;
        }
        return v;
    }
    std::string tok;
    while (!c.done() && c.peek() != '#' && !std::isspace(static_cast<unsigned char>(c.peek())))
        tok.push_back(c.s[c.i++]);
    if (tok == "true" || tok == "false") {
        v.kind = ConfigValue::Kind::Boolean;
        v.boolean = tok == "true";
        return v;
    }
    if (tok == "inf") {
        v.kind = ConfigValue::Kind::Number;
        v.number = std::numeric_limits<double>::infinity();
        return v;
    }
    v.kind = ConfigValue::Kind::Number;
    v.number = parse_number_token(c, tok);
    return v;
}

} // namespace

double ConfigTable::number(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        fail("config-parse", "missing required field '" + key + "' (table at line " +
                                 std::to_string(line) + ")");
    if (it->second.kind != ConfigValue::Kind::Number)
        fail("config-parse", "field '" + key + "' must be a number (line " +
                                 std::to_string(it->second.line) + ")");
    return it->second.number;
}

double ConfigTable::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::string ConfigTable::text(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        fail("config-parse", "missing required field '" + key + "' (table at line " +
                                 std::to_string(line) + ")");
    if (it->second.kind != ConfigValue::Kind::String)
        fail("config-parse", "field '" + key + "' must be a string (line " +
                                 std::to_string(it->second.line) + ")");
    return it->second.text;
}

std::string ConfigTable::text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
}

bool ConfigTable::boolean_or(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.kind != ConfigValue::Kind::Boolean)
        fail("config-parse", "field '" + key + "' must be true/false (line " +
                                 std::to_string(it->second.line) + ")");
    return it->second.boolean;
}

std::vector<double> ConfigTable::list(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        fail("config-parse", "missing required field '" + key + "' (table at line " +
                                 std::to_string(line) + ")");
    if (it->second.kind != ConfigValue::Kind::List)
        fail("config-parse", "field '" + key + "' must be a list (line " +
                                 std::to_string(it->second.line) + ")");
    return it->second.list;
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source_name) {
    ConfigFile cfg;
    ConfigTable* current = &cfg.root;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        Cursor c{raw, 0, lineno, source_name};
        c.skip_ws();
        if (c.done() || c.peek() == '#') continue;

        if (c.peek() == '[') {
            const bool array = c.i + 1 < raw.size() && raw[c.i + 1] == '[';
            c.i += array ? 2 : 1;
            std::string name;
            while (!c.done() && c.peek() != ']') name.push_back(raw[c.i++]);
            if (c.done()) parse_fail(source_name, lineno, c.col(), "unterminated section header");
            c.i += array ? 2 : 1;
            if (name.empty()) parse_fail(source_name, lineno, c.col(), "empty section name");
            if (array) {
                cfg.arrays[name].push_back(ConfigTable{{}, lineno});
                current = &cfg.arrays[name].back();
            } else {
                if (cfg.tables.count(name))
                    parse_fail(source_name, lineno, 1, "duplicate section [" + name + "]");
                cfg.tables[name] = ConfigTable{{}, lineno};
                current = &cfg.tables[name];
            }
            continue;
        }

        std::string key;
        while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) ||
                             c.peek() == '_' || c.peek() == '-'))
            key.push_back(raw[c.i++]);
        if (key.empty()) parse_fail(source_name, lineno, c.col(), "expected a key");
        c.skip_ws();
        if (c.peek() != '=') parse_fail(source_name, lineno, c.col(), "expected '='");
        ++c.i;
        ConfigValue v = parse_value(c);
        c.skip_ws();
        if (!c.done() && c.peek() != '#')
            parse_fail(source_name, lineno, c.col(), "unexpected trailing characters");
        if (current->values.count(key))
            parse_fail(source_name, lineno, 1, "duplicate key '" + key + "'");
        current->values[key] = v;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config-parse", "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

Domain2D load_domain_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config-parse", "cannot open domain file '" + path + "'");

    std::vector<Point> vertices;
    std::vector<Rect> holes;
    std::vector<int> gamma;
    bool gamma_all = true;

    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::istringstream ls(raw);
        std::string word;
        if (!(ls >> word) || word[0] == '#') continue;
        if (word == "vertex") {
            Point p;
            if (!(ls >> p.x >> p.y))
                fail("config-parse", path + ":" + std::to_string(lineno) + ": vertex needs x y");
            vertices.push_back(p);
        } else if (word == "hole") {
            Rect r;
            if (!(ls >> r.xmin >> r.ymin >> r.xmax >> r.ymax))
                fail("config-parse",
                     path + ":" + std::to_string(lineno) + ": hole needs xmin ymin xmax ymax");
            holes.push_back(r);
        } else if (word == "gamma") {
            std::string first;
            if (!(ls >> first))
                fail("config-parse", path + ":" + std::to_string(lineno) + ": gamma needs ids");
            if (first == "all") {
                gamma_all = true;
            } else {
                gamma_all = false;
                gamma.push_back(std::stoi(first));
                int id;
                while (ls >> id) gamma.push_back(id);
            }
        } else {
            fail("config-parse",
                 path + ":" + std::to_string(lineno) + ": unknown directive '" + word + "'");
        }
    }
    if (vertices.size() < 3)
        fail("config-parse", path + ": domain needs at least 3 vertices");
    return Domain2D::polygon(std::move(vertices), std::move(holes),
                             gamma_all ? std::vector<int>{} : gamma);
}

} // namespace pplab
