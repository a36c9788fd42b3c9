#pragma once

#include "calrev/corpus.hpp"
#include "calrev/session.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace calrev {

// Operator settings shared by the CLI and the service. Layered as:
// built-in defaults < INI file < CALREV_* environment variables < flags.
//
//   [server]   host, port, data_dir, ui_dir, lease_ttl
//   [corpus]   path, topics, id_column, title_column, abstract_column,
//              authors_column, year_column, publisher_column
//   [learner]  lambda, loop_type, iterations
//   [stopping] a, b
//   [session]  mode, budget, seed
struct Settings {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "data";
    std::filesystem::path ui_dir;
    std::int64_t lease_ttl = 600;
    std::filesystem::path corpus;
    std::filesystem::path topics;
    ColumnMap columns;
    SessionOptions session;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

EnvLookup process_environment();

// Throws IoError for an unreadable file, ValidationError for bad values.
void apply_ini_file(Settings& settings, const std::filesystem::path& path);
void apply_environment(Settings& settings, const EnvLookup& env);

}  // namespace calrev
