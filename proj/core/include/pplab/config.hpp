#pragma once

#include <map>
#include <string>
#include <vector>

#include "pplab/geometry.hpp"

namespace pplab {

// Minimal structured key-value format with nested tables:
//   key = 1.5 | "text" | true | [1, 2, 3] | "inf"
//   [section]          one table
//   [[section]]        array of tables
// '#' starts a comment. Errors carry line/column information.
struct ConfigValue {
    enum class Kind { Number, String, Boolean, List };
    Kind kind = Kind::Number;
    double number = 0;
    std::string text;
    bool boolean = false;
    std::vector<double> list;
    int line = 0;
};

struct ConfigTable {
    std::map<std::string, ConfigValue> values;
    int line = 0;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    bool boolean_or(const std::string& key, bool fallback) const;
    std::vector<double> list(const std::string& key) const;
};

struct ConfigFile {
    ConfigTable root;
    std::map<std::string, ConfigTable> tables;
    std::map<std::string, std::vector<ConfigTable>> arrays;

    static ConfigFile parse(const std::string& text, const std::string& source_name);
    static ConfigFile parse_file(const std::string& path);
};

// Domain description file: `vertex x y` lines (CCW), optional rectangular
// `hole xmin ymin xmax ymax` lines, one `gamma all` or `gamma i j ...` line.
Domain2D load_domain_file(const std::string& path);

} // namespace pplab
