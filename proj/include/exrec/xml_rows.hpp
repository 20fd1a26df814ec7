#pragma once

#include <expat.h>

#include <exception>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exrec/error.hpp"

namespace exrec {

/// Attributes of one `<row .../>` element, in document order.
class RowAttributes {
 public:
  explicit RowAttributes(const XML_Char** atts) {
    for (; atts && atts[0]; atts += 2) pairs_.emplace_back(atts[0], atts[1]);
  }

  const std::string* find(std::string_view name) const {
    for (const auto& [k, v] : pairs_)
      if (k == name) return &v;
    return nullptr;
  }

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
};

/// Streaming reader for the dump layout `<root><row .../>...</root>`.
///
/// The callback receives each row's attributes and the byte offset where the
/// row starts. Exceptions thrown by the callback stop the parser and are
/// rethrown from `read_file`/`read_string`. Any element other than `row`
/// directly under the root, or any element nested in a row, is a ParseError.
class XmlRowReader {
 public:
  using RowHandler =
      std::function<void(const RowAttributes&, std::int64_t byte_offset)>;

  XmlRowReader(std::string expected_root, RowHandler on_row)
      : root_(std::move(expected_root)), on_row_(std::move(on_row)) {}

  void read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    Parser p(*this);
    std::vector<char> buf(1 << 16);
    while (true) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      const auto n = in.gcount();
      if (in.bad()) throw IoError("read failure on '" + path + "'");
      const bool last = n < static_cast<std::streamsize>(buf.size());
      feed(p, buf.data(), static_cast<int>(n), last);
      if (last) break;
    }
  }

  void read_string(std::string_view xml) {
    Parser p(*this);
    feed(p, xml.data(), static_cast<int>(xml.size()), true);
  }

  std::size_t row_count() const noexcept { return rows_; }

 private:
  struct Parser {
    explicit Parser(XmlRowReader& r) : handle(XML_ParserCreate(nullptr)) {
      if (!handle) throw Error("expat: out of memory");
      r.depth_ = 0;
      r.rows_ = 0;
      r.pending_ = nullptr;
      r.parser_ = handle;
      XML_SetUserData(handle, &r);
      XML_SetElementHandler(handle, &XmlRowReader::on_start,
                            &XmlRowReader::on_end);
    }
    ~Parser() { XML_ParserFree(handle); }
    Parser(const Parser&) = delete;
    Parser& operator=(const Parser&) = delete;
    XML_Parser handle;
  };

  void feed(Parser& p, const char* data, int len, bool last) {
    const auto status = XML_Parse(p.handle, data, len, last ? 1 : 0);
    if (pending_) std::rethrow_exception(pending_);
    if (status != XML_STATUS_OK) {
      throw ParseError(
          std::string("malformed XML: ") +
              XML_ErrorString(XML_GetErrorCode(p.handle)),
          XML_GetCurrentByteIndex(p.handle));
    }
  }

  void fail(std::exception_ptr e) {
    pending_ = std::move(e);
    XML_StopParser(parser_, XML_FALSE);
  }

  static void on_start(void* self_ptr, const XML_Char* name,
                       const XML_Char** atts) {
    auto& self = *static_cast<XmlRowReader*>(self_ptr);
    if (self.pending_) return;
    const auto offset = XML_GetCurrentByteIndex(self.parser_);
    const std::string_view tag(name);
    try {
      if (self.depth_ == 0) {
        if (tag != self.root_)
          throw ParseError("expected root element <" + self.root_ +
                               ">, found <" + std::string(tag) + ">",
                           offset);
      } else if (self.depth_ == 1) {
        if (tag != "row")
          throw ParseError("unexpected element <" + std::string(tag) + ">",
                           offset);
        ++self.rows_;
        self.on_row_(RowAttributes(atts), offset);
      } else {
        throw ParseError("unexpected element <" + std::string(tag) +
                             "> nested in a row",
                         offset);
      }
    } catch (...) {
      self.fail(std::current_exception());
      return;
    }
    ++self.depth_;
  }

  static void on_end(void* self_ptr, const XML_Char*) {
    auto& self = *static_cast<XmlRowReader*>(self_ptr);
    --self.depth_;
  }

  std::string root_;
  RowHandler on_row_;
  XML_Parser parser_ = nullptr;
  int depth_ = 0;
  std::size_t rows_ = 0;
  std::exception_ptr pending_;
};

}  // namespace exrec
