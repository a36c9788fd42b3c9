#pragma once

#include "calrev/session.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace calrev {

// One JSON object per line:
//   {"topic":1,"doc":"d1","label":2,"assessor":"A","timestamp":1600000000}
std::string to_journal_line(const Judgment& judgment);
Judgment parse_journal_line(std::string_view line, std::size_t line_no = 0);

// Append-only judgment log. append() returns only after the line is on
// stable storage (write + fsync).
class JournalWriter {
public:
    explicit JournalWriter(const std::filesystem::path& path);
    ~JournalWriter();
    JournalWriter(const JournalWriter&) = delete;
    JournalWriter& operator=(const JournalWriter&) = delete;
    JournalWriter(JournalWriter&& other) noexcept;
    JournalWriter& operator=(JournalWriter&& other) noexcept;

    void append(const Judgment& judgment);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

// Reads every complete line. A final line without a trailing newline is a
// torn write from a crash and is ignored; a malformed complete line throws
// ParseError. A missing file reads as empty.
std::vector<Judgment> read_journal(const std::filesystem::path& path);

// Applies the judgments for the session's topic in order. Returns how many
// were applied.
std::size_t replay_journal(std::span<const Judgment> journal, Session& session);

}  // namespace calrev
