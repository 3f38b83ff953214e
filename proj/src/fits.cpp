#include "spherestat/fits.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include "spherestat/errors.hpp"
#include "spherestat/sampling.hpp"

namespace spherestat::fits {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(' ');
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(' ');
    return std::string(s.substr(b, e - b + 1));
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::uint64_t roundUpBlock(std::uint64_t n) { return (n + kBlockSize - 1) / kBlockSize * kBlockSize; }

// Big-endian decode, independent of host byte order.
double decode(const std::byte* p, ColumnType t) {
    auto u = [p](int i) { return static_cast<std::uint64_t>(std::to_integer<unsigned>(p[i])); };
    switch (t) {
    case ColumnType::float32: {
        const auto bits = static_cast<std::uint32_t>((u(0) << 24) | (u(1) << 16) | (u(2) << 8) | u(3));
        return static_cast<double>(std::bit_cast<float>(bits));
    }
    case ColumnType::int32: {
        const auto bits = static_cast<std::uint32_t>((u(0) << 24) | (u(1) << 16) | (u(2) << 8) | u(3));
        return static_cast<double>(std::bit_cast<std::int32_t>(bits));
    }
    case ColumnType::float64: {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits = (bits << 8) | u(i);
        return std::bit_cast<double>(bits);
    }
    case ColumnType::int16: {
        const auto bits = static_cast<std::uint16_t>((u(0) << 8) | u(1));
        return static_cast<double>(std::bit_cast<std::int16_t>(bits));
    }
    }
    return 0.0;
}

void encode(double v, ColumnType t, std::byte* p) {
    std::uint64_t bits = 0;
    int width = 0;
    switch (t) {
    case ColumnType::float32:
        bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        width = 4;
        break;
    case ColumnType::int32: {
        if (!(v >= -2147483648.0 && v <= 2147483647.0) || v != std::trunc(v))
            throw SchemaError("value " + std::to_string(v) + " is not representable as int32");
        bits = std::bit_cast<std::uint32_t>(static_cast<std::int32_t>(v));
        width = 4;
        break;
    }
    case ColumnType::float64:
        bits = std::bit_cast<std::uint64_t>(v);
        width = 8;
        break;
    case ColumnType::int16: {
        if (!(v >= -32768.0 && v <= 32767.0) || v != std::trunc(v))
            throw SchemaError("value " + std::to_string(v) + " is not representable as int16");
        bits = std::bit_cast<std::uint16_t>(static_cast<std::int16_t>(v));
        width = 2;
        break;
    }
    }
    for (int i = 0; i < width; ++i) p[i] = static_cast<std::byte>((bits >> (8 * (width - 1 - i))) & 0xff);
}

ColumnType parseTform(const std::string& raw) {
    const std::string t = upper(trim(raw));
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    const std::string repeat = t.substr(0, i);
    const std::string code = t.substr(i);
    if (!repeat.empty() && repeat != "1")
        throw UnsupportedFormatError("TFORM '" + raw + "': only scalar (repeat 1) fields are supported");
    if (code == "E") return ColumnType::float32;
    if (code == "J") return ColumnType::int32;
    if (code == "D") return ColumnType::float64;
    if (code == "I") return ColumnType::int16;
    throw UnsupportedFormatError("unsupported TFORM '" + raw + "'");
}

struct HeaderBlock {
    FitsHeader header;
    std::uint64_t end = 0; // offset just past the header's last block
};

HeaderBlock readHeader(const ByteSource& src, std::uint64_t offset) {
    std::vector<Card> cards;
    std::vector<std::byte> block(kBlockSize);
    for (std::uint64_t pos = offset;; pos += kBlockSize) {
        if (pos + kBlockSize > src.size()) throw ParseError("truncated FITS header (no END card)");
        src.read(pos, block);
        const char* text = reinterpret_cast<const char*>(block.data());
        for (std::size_t c = 0; c < kBlockSize; c += kCardSize) {
            const std::string_view card(text + c, kCardSize);
            const std::string key = trim(card.substr(0, 8));
            if (key == "END") return {FitsHeader(std::move(cards)), pos + kBlockSize};
            if (key.empty() && trim(card).empty()) continue;
            cards.push_back(parseCard(card));
        }
    }
}

std::uint64_t dataSize(const FitsHeader& h) {
    const auto naxis = h.integer("NAXIS").value_or(0);
    if (naxis == 0) return 0;
    const auto bitpix = h.integer("BITPIX");
    if (!bitpix) throw ParseError("HDU lacks BITPIX");
    std::uint64_t elems = 1;
    for (std::int64_t i = 1; i <= naxis; ++i) {
        const auto n = h.integer("NAXIS" + std::to_string(i));
        if (!n || *n < 0) throw ParseError("HDU lacks NAXIS" + std::to_string(i));
        elems *= static_cast<std::uint64_t>(*n);
    }
    const auto pcount = static_cast<std::uint64_t>(h.integer("PCOUNT").value_or(0));
    const auto gcount = static_cast<std::uint64_t>(h.integer("GCOUNT").value_or(1));
    return static_cast<std::uint64_t>(std::abs(*bitpix)) / 8 * gcount * (pcount + elems);
}

std::string formatValue(const CardValue& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            char buf[72];
            if constexpr (std::is_same_v<T, std::monostate>) {
                return std::string(20, ' ');
            } else if constexpr (std::is_same_v<T, bool>) {
                std::snprintf(buf, sizeof buf, "%20s", x ? "T" : "F");
                return buf;
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                std::snprintf(buf, sizeof buf, "%20lld", static_cast<long long>(x));
                return buf;
            } else if constexpr (std::is_same_v<T, double>) {
                std::snprintf(buf, sizeof buf, "%20.15G", x);
                std::string s = buf;
                if (s.find_first_of(".E") == std::string::npos) s = s.substr(1) + ".";
                return s;
            } else {
                std::string quoted = "'";
                for (char c : x) {
                    quoted.push_back(c);
                    if (c == '\'') quoted.push_back('\'');
                }
                while (quoted.size() < 9) quoted.push_back(' ');
                quoted.push_back('\'');
                if (quoted.size() < 20) quoted.append(20 - quoted.size(), ' ');
                return quoted;
            }
        },
        v);
}

} // namespace

std::size_t byteWidth(ColumnType t) {
    switch (t) {
    case ColumnType::float32: return 4;
    case ColumnType::int32: return 4;
    case ColumnType::float64: return 8;
    case ColumnType::int16: return 2;
    }
    return 0;
}

std::string tformCode(ColumnType t) {
    switch (t) {
    case ColumnType::float32: return "1E";
    case ColumnType::int32: return "1J";
    case ColumnType::float64: return "1D";
    case ColumnType::int16: return "1I";
    }
    return "";
}

std::string_view typeName(ColumnType t) {
    switch (t) {
    case ColumnType::float32: return "float32";
    case ColumnType::int32: return "int32";
    case ColumnType::float64: return "float64";
    case ColumnType::int16: return "int16";
    }
    return "";
}

std::string formatCard(const Card& card) {
    std::string key = upper(card.keyword);
    if (key.size() > 8) throw FormatError("FITS keyword longer than 8 characters: " + key);
    key.resize(8, ' ');
    std::string out = key;
    if (!std::holds_alternative<std::monostate>(card.value)) {
        out += "= " + formatValue(card.value);
        if (!card.comment.empty()) out += " / " + card.comment;
    } else if (!card.comment.empty()) {
        out += "  " + card.comment;
    }
    if (out.size() > kCardSize) out.resize(kCardSize);
    out.resize(kCardSize, ' ');
    return out;
}

Card parseCard(std::string_view text) {
    if (text.size() != kCardSize) throw ParseError("FITS card is not 80 characters");
    for (char c : text)
        if (c < 0x20 || c > 0x7e) throw ParseError("FITS card contains non-ASCII bytes");
    Card card;
    card.keyword = trim(text.substr(0, 8));
    if (text.substr(8, 2) != "= ") {
        card.comment = trim(text.substr(8));
        return card;
    }
    std::string_view rest = text.substr(10);
    std::size_t i = rest.find_first_not_of(' ');
    if (i == std::string_view::npos) return card;

    std::string_view tail;
    if (rest[i] == '\'') {
        std::string value;
        std::size_t j = i + 1;
        for (;; ++j) {
            if (j >= rest.size()) throw ParseError("unterminated string in card " + card.keyword);
            if (rest[j] == '\'') {
                if (j + 1 < rest.size() && rest[j + 1] == '\'') {
                    value.push_back('\'');
                    ++j;
                    continue;
                }
                break;
            }
            value.push_back(rest[j]);
        }
        // Trailing blanks in FITS strings are not significant.
        while (!value.empty() && value.back() == ' ') value.pop_back();
        card.value = value;
        tail = rest.substr(j + 1);
    } else {
        const std::size_t slash = rest.find('/', i);
        const std::string token = trim(rest.substr(i, slash == std::string_view::npos ? rest.size() - i : slash - i));
        tail = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
        if (token == "T" || token == "F") {
            card.value = token == "T";
        } else if (!token.empty()) {
            std::int64_t iv = 0;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), iv);
            if (ec == std::errc{} && ptr == token.data() + token.size()) {
                card.value = iv;
            } else {
                std::string num = token;
                std::replace(num.begin(), num.end(), 'D', 'E');
                std::replace(num.begin(), num.end(), 'd', 'e');
                char* end = nullptr;
                errno = 0;
                const double dv = std::strtod(num.c_str(), &end);
                if (end != num.c_str() + num.size() || errno == ERANGE)
                    throw ParseError("cannot parse value '" + token + "' of card " + card.keyword);
                card.value = dv;
            }
        }
    }
    const auto slash = tail.find('/');
    if (slash != std::string_view::npos) card.comment = trim(tail.substr(slash + 1));
    return card;
}

const Card* FitsHeader::find(std::string_view keyword) const {
    for (const auto& c : cards_)
        if (c.keyword == keyword) return &c;
    return nullptr;
}

std::optional<std::int64_t> FitsHeader::integer(std::string_view keyword) const {
    const Card* c = find(keyword);
    if (!c) return std::nullopt;
    if (const auto* i = std::get_if<std::int64_t>(&c->value)) return *i;
    if (const auto* d = std::get_if<double>(&c->value); d && *d == std::trunc(*d))
        return static_cast<std::int64_t>(*d);
    throw ParseError("card " + std::string(keyword) + " is not an integer");
}

std::optional<std::string> FitsHeader::string(std::string_view keyword) const {
    const Card* c = find(keyword);
    if (!c) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&c->value)) return *s;
    throw ParseError("card " + std::string(keyword) + " is not a string");
}

std::string FitsHeader::text(std::string_view keyword) const {
    const Card* c = find(keyword);
    if (!c) return {};
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, bool>) return x ? "T" : "F";
            else if constexpr (std::is_same_v<T, std::string>) return x;
            else return std::to_string(x);
        },
        c->value);
}

FileByteSource::FileByteSource(const std::string& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_RDONLY);
    if (fd_ < 0) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
        ::close(fd_);
        throw IoError("cannot stat '" + path + "'");
    }
    size_ = static_cast<std::uint64_t>(st.st_size);
}

FileByteSource::~FileByteSource() {
    if (fd_ >= 0) ::close(fd_);
}

void FileByteSource::read(std::uint64_t offset, std::span<std::byte> out) const {
    std::size_t done = 0;
    while (done < out.size()) {
        const ssize_t n = ::pread(fd_, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw IoError("short read from '" + path_ + "'");
        done += static_cast<std::size_t>(n);
    }
}

void CountingByteSource::read(std::uint64_t offset, std::span<std::byte> out) const {
    {
        std::lock_guard lock(mutex_);
        ranges_.emplace_back(offset, offset + out.size());
    }
    inner_->read(offset, out);
}

std::uint64_t CountingByteSource::bytesRead() const { return bytesReadFrom(0); }

std::uint64_t CountingByteSource::bytesReadFrom(std::uint64_t offset) const {
    std::lock_guard lock(mutex_);
    std::uint64_t total = 0;
    for (const auto& [b, e] : ranges_)
        if (e > offset) total += e - std::max(b, offset);
    return total;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> CountingByteSource::ranges() const {
    std::lock_guard lock(mutex_);
    return ranges_;
}

void CountingByteSource::reset() {
    std::lock_guard lock(mutex_);
    ranges_.clear();
}

const Column& Table::column(std::string_view name) const {
    for (const auto& c : columns)
        if (c.name == name) return c;
    throw SchemaError("no column named '" + std::string(name) + "'");
}

bool Table::hasColumn(std::string_view name) const {
    return std::any_of(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
}

std::vector<std::string> MapSource::columnNames() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

const ColumnInfo& MapSource::column(std::string_view name) const {
    for (const auto& c : columns_)
        if (c.name == name) return c;
    throw SchemaError("map has no column named '" + std::string(name) + "'");
}

MapSource openMap(const std::string& path) { return openMap(std::make_shared<FileByteSource>(path)); }

MapSource openMap(std::shared_ptr<const ByteSource> source) {
    MapSource m;
    m.source_ = std::move(source);
    const ByteSource& src = *m.source_;

    auto primary = readHeader(src, 0);
    if (!primary.header.find("SIMPLE")) throw FormatError("not a FITS file (missing SIMPLE card)");
    m.primary_ = primary.header;

    std::uint64_t pos = primary.end + roundUpBlock(dataSize(primary.header));
    for (;;) {
        if (pos >= src.size()) throw FormatError("FITS file has no BINTABLE extension");
        auto hdu = readHeader(src, pos);
        const auto xt = hdu.header.string("XTENSION");
        if (xt && upper(*xt) == "BINTABLE") {
            m.header_ = std::move(hdu.header);
            m.dataStart_ = hdu.end;
            break;
        }
        pos = hdu.end + roundUpBlock(dataSize(hdu.header));
    }

    const FitsHeader& h = m.header_;
    const auto naxis1 = h.integer("NAXIS1"), naxis2 = h.integer("NAXIS2"), tfields = h.integer("TFIELDS");
    if (!naxis1 || !naxis2 || !tfields || *naxis1 < 0 || *naxis2 < 0 || *tfields < 0)
        throw ParseError("BINTABLE header lacks NAXIS1/NAXIS2/TFIELDS");
    m.rowBytes_ = static_cast<std::size_t>(*naxis1);
    m.rowCount_ = *naxis2;

    std::size_t offset = 0;
    for (std::int64_t i = 1; i <= *tfields; ++i) {
        const auto form = h.string("TFORM" + std::to_string(i));
        if (!form) throw ParseError("missing TFORM" + std::to_string(i));
        ColumnInfo ci;
        ci.type = parseTform(*form);
        ci.name = h.string("TTYPE" + std::to_string(i)).value_or("COL" + std::to_string(i));
        ci.offset = offset;
        offset += byteWidth(ci.type);
        m.columns_.push_back(std::move(ci));
    }
    if (offset != m.rowBytes_)
        throw FormatError("NAXIS1 = " + std::to_string(m.rowBytes_) + " disagrees with field widths (" +
                          std::to_string(offset) + ")");
    if (m.dataStart_ + static_cast<std::uint64_t>(m.rowBytes_) * static_cast<std::uint64_t>(m.rowCount_) > src.size())
        throw FormatError("FITS payload is truncated");

    if (const auto nside = h.integer("NSIDE")) {
        m.resolution_ = healpix::Resolution::fromNside(*nside);
    } else {
        const std::int64_t perFace = m.rowCount_ / 12;
        if (m.rowCount_ % 12 != 0 || perFace < 1) throw FormatError("no NSIDE card and row count is not 12 nside^2");
        const auto side = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(perFace))));
        if (side * side != perFace || (side & (side - 1)) != 0)
            throw FormatError("no NSIDE card and row count is not 12 nside^2");
        m.resolution_ = healpix::Resolution::fromNside(side);
    }
    const auto ordering = h.string("ORDERING");
    if (!ordering) throw FormatError("BINTABLE header lacks an ORDERING card");
    m.scheme_ = healpix::parseScheme(*ordering);
    return m;
}

namespace {

Table emptyTable(const MapSource& src, const std::vector<std::string>& columns, std::size_t rows,
                 std::vector<const ColumnInfo*>& infos) {
    Table t;
    t.rowCount = rows;
    for (const auto& name : columns) {
        const ColumnInfo& ci = src.column(name);
        infos.push_back(&ci);
        t.columns.push_back({ci.name, ci.type, {}});
        t.columns.back().values.reserve(rows);
    }
    return t;
}

void decodeRows(const std::byte* data, std::size_t count, std::size_t rowBytes,
                const std::vector<const ColumnInfo*>& infos, Table& t) {
    for (std::size_t r = 0; r < count; ++r) {
        const std::byte* row = data + r * rowBytes;
        for (std::size_t c = 0; c < infos.size(); ++c)
            t.columns[c].values.push_back(decode(row + infos[c]->offset, infos[c]->type));
    }
}

constexpr std::size_t kChunkBytes = std::size_t{1} << 22;

} // namespace

Table readRows(const MapSource& src, std::span<const std::int64_t> rows, const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 1 || rows[i] > src.rowCount())
            throw BoundsError("row " + std::to_string(rows[i]) + " outside [1, " + std::to_string(src.rowCount()) +
                              "]");
        if (i > 0 && rows[i] <= rows[i - 1]) throw BoundsError("row indices must be strictly increasing");
    }
    std::vector<const ColumnInfo*> infos;
    Table t = emptyTable(src, columns, rows.size(), infos);
    if (infos.empty() || rows.empty()) return t;

    const std::size_t rb = src.rowBytes();
    const std::size_t maxRun = std::max<std::size_t>(1, kChunkBytes / std::max<std::size_t>(rb, 1));
    std::vector<std::byte> buf;
    std::size_t i = 0;
    while (i < rows.size()) {
        // Coalesce consecutive rows into one read.
        std::size_t j = i + 1;
        while (j < rows.size() && rows[j] == rows[j - 1] + 1 && j - i < maxRun) ++j;
        const std::size_t count = j - i;
        buf.resize(count * rb);
        src.bytes().read(src.dataStart() + static_cast<std::uint64_t>(rows[i] - 1) * rb, buf);
        decodeRows(buf.data(), count, rb, infos, t);
        i = j;
    }
    return t;
}

Table readAll(const MapSource& src, const std::vector<std::string>& columns) {
    std::vector<const ColumnInfo*> infos;
    Table t = emptyTable(src, columns, static_cast<std::size_t>(src.rowCount()), infos);
    if (infos.empty()) return t;
    const std::size_t rb = src.rowBytes();
    const std::size_t perChunk = std::max<std::size_t>(1, kChunkBytes / std::max<std::size_t>(rb, 1));
    std::vector<std::byte> buf;
    for (std::int64_t first = 0; first < src.rowCount();) {
        const std::size_t count =
            std::min<std::size_t>(perChunk, static_cast<std::size_t>(src.rowCount() - first));
        buf.resize(count * rb);
        src.bytes().read(src.dataStart() + static_cast<std::uint64_t>(first) * rb, buf);
        decodeRows(buf.data(), count, rb, infos, t);
        first += static_cast<std::int64_t>(count);
    }
    return t;
}

RowSample sampleRows(const MapSource& src, std::int64_t sampleSize, std::uint64_t seed,
                     const std::vector<std::string>& columns) {
    if (sampleSize < 1) throw DomainError("sample size must be positive");
    if (sampleSize > src.rowCount())
        throw DomainError("sample size " + std::to_string(sampleSize) + " exceeds row count " +
                          std::to_string(src.rowCount()));
    RowSample s;
    s.rows = sampleWithoutReplacement(src.rowCount(), sampleSize, seed);
    s.table = readRows(src, s.rows, columns);
    return s;
}

void writeFits(const Table& table, const MapMeta& meta, const std::string& path) {
    for (const auto& c : table.columns)
        if (c.values.size() != table.rowCount)
            throw SchemaError("column '" + c.name + "' length differs from the table row count");

    std::size_t rowBytes = 0;
    for (const auto& c : table.columns) rowBytes += byteWidth(c.type);

    auto padHeader = [](std::vector<Card> cards) {
        std::string text;
        for (const auto& c : cards) text += formatCard(c);
        text += formatCard({"END", std::monostate{}, ""});
        text.resize(roundUpBlock(text.size()), ' ');
        return text;
    };

    std::vector<Card> primary = {
        {"SIMPLE", true, "conforms to FITS standard"},
        {"BITPIX", std::int64_t{8}, "array data type"},
        {"NAXIS", std::int64_t{0}, "number of array dimensions"},
        {"EXTEND", true, ""},
    };

    const std::int64_t npix = meta.resolution.npix();
    std::vector<Card> ext = {
        {"XTENSION", std::string("BINTABLE"), "binary table extension"},
        {"BITPIX", std::int64_t{8}, "8-bit bytes"},
        {"NAXIS", std::int64_t{2}, "2-dimensional binary table"},
        {"NAXIS1", static_cast<std::int64_t>(rowBytes), "width of table in bytes"},
        {"NAXIS2", static_cast<std::int64_t>(table.rowCount), "number of rows in table"},
        {"PCOUNT", std::int64_t{0}, "size of special data area"},
        {"GCOUNT", std::int64_t{1}, "one data group"},
        {"TFIELDS", static_cast<std::int64_t>(table.columns.size()), "number of fields in each row"},
    };
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        const auto n = std::to_string(i + 1);
        ext.push_back({"TTYPE" + n, table.columns[i].name, "label for field " + n});
        ext.push_back({"TFORM" + n, tformCode(table.columns[i].type), "data format of field"});
    }
    ext.push_back({"PIXTYPE", std::string("HEALPIX"), "HEALPIX pixelisation"});
    ext.push_back({"ORDERING", upper(std::string(healpix::schemeName(meta.scheme))), "Pixel ordering scheme"});
    ext.push_back({"NSIDE", meta.resolution.nside(), "Resolution parameter of HEALPIX"});
    ext.push_back({"FIRSTPIX", std::int64_t{0}, "First pixel # (0 based)"});
    ext.push_back({"LASTPIX", npix - 1, "Last pixel # (0 based)"});
    ext.push_back({"INDXSCHM", std::string("IMPLICIT"), "Indexing: IMPLICIT or EXPLICIT"});
    for (const auto& c : meta.extraCards) ext.push_back(c);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path + "'");
    const std::string h1 = padHeader(primary), h2 = padHeader(ext);
    out.write(h1.data(), static_cast<std::streamsize>(h1.size()));
    out.write(h2.data(), static_cast<std::streamsize>(h2.size()));

    const std::size_t perChunk = std::max<std::size_t>(1, kChunkBytes / std::max<std::size_t>(rowBytes, 1));
    std::vector<std::byte> buf;
    for (std::size_t first = 0; first < table.rowCount && rowBytes > 0; first += perChunk) {
        const std::size_t count = std::min(perChunk, table.rowCount - first);
        buf.assign(count * rowBytes, std::byte{0});
        for (std::size_t r = 0; r < count; ++r) {
            std::byte* row = buf.data() + r * rowBytes;
            std::size_t off = 0;
            for (const auto& c : table.columns) {
                encode(c.values[first + r], c.type, row + off);
                off += byteWidth(c.type);
            }
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    const std::uint64_t payload = static_cast<std::uint64_t>(rowBytes) * table.rowCount;
    const std::string pad(roundUpBlock(payload) - payload, '\0');
    out.write(pad.data(), static_cast<std::streamsize>(pad.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

} // namespace spherestat::fits
