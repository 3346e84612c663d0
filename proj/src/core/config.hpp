#pragma once

#include "core/vec.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace texsplat {

// One entry per configuration key. The same table drives the config-file
// parser, the CLI flag set, and --help, so keys and flags stay bijective.
struct ConfigKey {
    const char* key;
    const char* flag;
    const char* type; // int | float | bool | string
    const char* def;
    const char* help;
};

const std::vector<ConfigKey>& config_schema();

class Config {
public:
    static Config defaults();

    // key = value lines, '#' comments, optional double quotes around strings.
    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value); // rejects unknown keys

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    // "black", "white", or "R,G,B" floats in [0,1].
    Vec3<float> get_background() const;

    std::string canonical() const; // sorted key=value lines of all keys
    uint64_t hash() const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace texsplat
