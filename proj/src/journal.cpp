#include "calrev/journal.hpp"

#include "calrev/errors.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <unistd.h>

namespace calrev {

using nlohmann::json;

std::string to_journal_line(const Judgment& j) {
    json obj = {{"topic", j.topic_id},
                {"doc", j.doc_id},
                {"label", j.label},
                {"assessor", j.assessor_id},
                {"timestamp", j.timestamp}};
    return obj.dump() + "\n";
}

Judgment parse_journal_line(std::string_view line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("bad journal line: ") + e.what(), line_no);
    }
    try {
        Judgment j;
        j.topic_id = obj.at("topic").get<int>();
        j.doc_id = obj.at("doc").get<std::string>();
        j.label = obj.at("label").get<int>();
        j.assessor_id = obj.at("assessor").get<std::string>();
        j.timestamp = obj.at("timestamp").get<std::int64_t>();
        return j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad journal record: ") + e.what(), line_no);
    }
}

JournalWriter::JournalWriter(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open journal " + path.string() + ": " + std::strerror(errno));
}

JournalWriter::~JournalWriter() {
    if (fd_ >= 0) ::close(fd_);
}

JournalWriter::JournalWriter(JournalWriter&& other) noexcept
    : path_(std::move(other.path_)), fd_(std::exchange(other.fd_, -1)) {}

JournalWriter& JournalWriter::operator=(JournalWriter&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        path_ = std::move(other.path_);
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

void JournalWriter::append(const Judgment& judgment) {
    const std::string line = to_journal_line(judgment);
    // One write() per record keeps O_APPEND records contiguous.
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("journal write failed: " + std::string(std::strerror(errno)));
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw IoError("journal fsync failed: " + std::string(std::strerror(errno)));
}

std::vector<Judgment> read_journal(const std::filesystem::path& path) {
    std::vector<Judgment> out;
    if (!std::filesystem::exists(path)) return out;
    const std::string text = read_file(path);
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string::npos) break;  // torn tail
        ++line_no;
        std::string_view line(text.data() + start, end - start);
        if (!line.empty()) out.push_back(parse_journal_line(line, line_no));
        start = end + 1;
    }
    return out;
}

std::size_t replay_journal(std::span<const Judgment> journal, Session& session) {
    std::size_t applied = 0;
    for (const auto& j : journal) {
        if (j.topic_id != session.topic().topic_id) continue;
        session.record_judgment(j);
        ++applied;
    }
    return applied;
}

}  // namespace calrev
