#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spherestat/healpix.hpp"

// FITS binary-table access for HEALPix maps. Only header blocks are read at
// open time; rows are fetched on demand by byte offset
// dataStart + (row - 1) * rowBytes. Row indices are 1-based.
namespace spherestat::fits {

inline constexpr std::size_t kBlockSize = 2880;
inline constexpr std::size_t kCardSize = 80;

enum class ColumnType { float32, int32, float64, int16 };

std::size_t byteWidth(ColumnType t);
std::string tformCode(ColumnType t); // "1E", "1J", "1D", "1I"
std::string_view typeName(ColumnType t);

using CardValue = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Card {
    std::string keyword;
    CardValue value;
    std::string comment;
};

/// Renders one 80-character fixed-format header card.
std::string formatCard(const Card& card);
/// Parses one 80-character card. Throws ParseError on malformed values.
Card parseCard(std::string_view text);

class FitsHeader {
  public:
    FitsHeader() = default;
    explicit FitsHeader(std::vector<Card> cards) : cards_(std::move(cards)) {}

    const std::vector<Card>& cards() const { return cards_; }
    const Card* find(std::string_view keyword) const;
    std::optional<std::int64_t> integer(std::string_view keyword) const;
    std::optional<std::string> string(std::string_view keyword) const;
    /// Value rendered as text, for reports ("" when absent).
    std::string text(std::string_view keyword) const;

  private:
    std::vector<Card> cards_;
};

/// Random-access byte provider behind a MapSource. Implementations must be
/// safe for concurrent read() calls.
class ByteSource {
  public:
    virtual ~ByteSource() = default;
    virtual std::uint64_t size() const = 0;
    virtual void read(std::uint64_t offset, std::span<std::byte> out) const = 0;
};

/// POSIX pread-backed file.
class FileByteSource : public ByteSource {
  public:
    explicit FileByteSource(const std::string& path);
    ~FileByteSource() override;
    FileByteSource(const FileByteSource&) = delete;
    FileByteSource& operator=(const FileByteSource&) = delete;

    std::uint64_t size() const override { return size_; }
    void read(std::uint64_t offset, std::span<std::byte> out) const override;

  private:
    int fd_ = -1;
    std::uint64_t size_ = 0;
    std::string path_;
};

/// Decorator recording every byte range read through it.
class CountingByteSource : public ByteSource {
  public:
    explicit CountingByteSource(std::shared_ptr<const ByteSource> inner) : inner_(std::move(inner)) {}

    std::uint64_t size() const override { return inner_->size(); }
    void read(std::uint64_t offset, std::span<std::byte> out) const override;

    std::uint64_t bytesRead() const;
    /// Bytes read at or beyond the given offset.
    std::uint64_t bytesReadFrom(std::uint64_t offset) const;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges() const; // [begin, end)
    void reset();

  private:
    std::shared_ptr<const ByteSource> inner_;
    mutable std::mutex mutex_;
    mutable std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges_;
};

struct ColumnInfo {
    std::string name;
    ColumnType type = ColumnType::float32;
    std::size_t offset = 0; // byte offset inside a row
};

/// Decoded column. Every supported FITS type is exactly representable as a
/// double, so values are widened on decode.
struct Column {
    std::string name;
    ColumnType type = ColumnType::float32;
    std::vector<double> values;
};

struct Table {
    std::size_t rowCount = 0;
    std::vector<Column> columns;

    const Column& column(std::string_view name) const;
    bool hasColumn(std::string_view name) const;
};

class MapSource {
  public:
    const FitsHeader& primaryHeader() const { return primary_; }
    const FitsHeader& header() const { return header_; }
    std::uint64_t dataStart() const { return dataStart_; }
    std::size_t rowBytes() const { return rowBytes_; }
    std::int64_t rowCount() const { return rowCount_; }
    const std::vector<ColumnInfo>& columns() const { return columns_; }
    std::vector<std::string> columnNames() const;
    const ColumnInfo& column(std::string_view name) const;

    healpix::Resolution resolution() const { return resolution_; }
    healpix::Scheme scheme() const { return scheme_; }
    bool fullSky() const { return rowCount_ == resolution_.npix(); }

    const ByteSource& bytes() const { return *source_; }

  private:
    friend MapSource openMap(std::shared_ptr<const ByteSource> source);

    std::shared_ptr<const ByteSource> source_;
    FitsHeader primary_;
    FitsHeader header_;
    std::uint64_t dataStart_ = 0;
    std::size_t rowBytes_ = 0;
    std::int64_t rowCount_ = 0;
    std::vector<ColumnInfo> columns_;
    healpix::Resolution resolution_ = healpix::Resolution::fromOrder(0);
    healpix::Scheme scheme_ = healpix::Scheme::nested;
};

MapSource openMap(const std::string& path);
MapSource openMap(std::shared_ptr<const ByteSource> source);

/// rows: strictly increasing 1-based indices. Only the requested rows'
/// bytes are read.
Table readRows(const MapSource& src, std::span<const std::int64_t> rows, const std::vector<std::string>& columns);
Table readAll(const MapSource& src, const std::vector<std::string>& columns);

struct RowSample {
    std::vector<std::int64_t> rows;
    Table table;
};

/// Seeded simple random sample of rows, read lazily.
RowSample sampleRows(const MapSource& src, std::int64_t sampleSize, std::uint64_t seed,
                     const std::vector<std::string>& columns);

struct MapMeta {
    healpix::Resolution resolution = healpix::Resolution::fromOrder(0);
    healpix::Scheme scheme = healpix::Scheme::nested;
    std::vector<Card> extraCards;
};

/// Writes a primary HDU plus one BINTABLE holding the table's columns.
void writeFits(const Table& table, const MapMeta& meta, const std::string& path);

} // namespace spherestat::fits
