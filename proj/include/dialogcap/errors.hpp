#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dialogcap {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Questioner output was empty after trimming at the "Answer:" marker.
class EmptyQuestion : public Error {
public:
    EmptyQuestion() : Error("question is empty after trimming") {}
};

// Answerer output was empty after trimming at the "Question:" marker.
class EmptyAnswer : public Error {
public:
    EmptyAnswer() : Error("answer is empty after trimming") {}
};

// HTTP request failed after all retries. status is 0 when no response arrived.
class TransportError : public Error {
public:
    TransportError(int status, std::string body)
        : Error("transport failure (status " + std::to_string(status) + "): " + body),
          status(status),
          body(std::move(body)) {}

    int status;
    std::string body;
};

// The configured auth environment variable is not set.
class AuthMissing : public Error {
public:
    explicit AuthMissing(const std::string& env_var)
        : Error("auth environment variable not set: " + env_var) {}
};

// A scripted backend ran out of responses and on_exhausted is `error`.
class ScriptExhausted : public Error {
public:
    ScriptExhausted() : Error("scripted backend has no responses left") {}
};

// The VQA service reported it cannot load the requested image.
class ImageUnavailable : public Error {
public:
    explicit ImageUnavailable(const std::string& image_ref)
        : Error("image unavailable: " + image_ref) {}
};

// A JSONL line failed to parse. line_number is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line_number, std::string detail)
        : Error("parse error at line " + std::to_string(line_number) + ": " + detail),
          line_number(line_number),
          detail(std::move(detail)) {}

    std::size_t line_number;
    std::string detail;
};

// A WNDB or TSV taxonomy line does not follow the expected layout.
class MalformedLine : public Error {
public:
    MalformedLine(std::string file, std::size_t line_number, std::string detail)
        : Error(file + ":" + std::to_string(line_number) + ": " + detail),
          file(std::move(file)),
          line_number(line_number),
          detail(std::move(detail)) {}

    std::string file;
    std::size_t line_number;
    std::string detail;
};

// A required input file does not exist or cannot be opened.
class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path) : Error("missing file: " + path), path(path) {}

    std::string path;
};

// The hypernym graph contains a cycle; `cycle` lists one offending loop.
class CyclicTaxonomy : public Error {
public:
    explicit CyclicTaxonomy(std::vector<std::string> cycle_ids)
        : Error(describe(cycle_ids)), cycle(std::move(cycle_ids)) {}

    std::vector<std::string> cycle;

private:
    static std::string describe(const std::vector<std::string>& ids) {
        std::string msg = "cyclic taxonomy:";
        for (const auto& id : ids) msg += " " + id;
        return msg;
    }
};

// A taxonomy row references a hypernym id that is never defined.
class DanglingEdge : public Error {
public:
    DanglingEdge(const std::string& from, const std::string& to)
        : Error("synset " + from + " references unknown hypernym " + to) {}
};

// A synset id passed to a taxonomy query does not exist.
class UnknownSynset : public Error {
public:
    explicit UnknownSynset(const std::string& id) : Error("unknown synset: " + id) {}
};

// A labeled image has no caption entry in the coverage input.
class MissingCaption : public Error {
public:
    explicit MissingCaption(const std::string& image_id)
        : Error("no caption for labeled image: " + image_id), image_id(image_id) {}

    std::string image_id;
};

// Bad or unreadable configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace dialogcap
