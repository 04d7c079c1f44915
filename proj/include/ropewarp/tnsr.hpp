#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "ropewarp/error.hpp"
#include "ropewarp/tensor.hpp"

namespace ropewarp {

// ===== TNSR container =====
//
// Little-endian layout, version 1:
//   bytes 0..3   magic "TNSR"
//   byte  4      format version (1)
//   byte  5      dtype: 0 = real float64, 1 = complex float64 (re,im interleaved)
//   byte  6      rank
//   next         rank * uint64 extents
//   rest         payload, raw float64 values in row-major order
// A rank-0 file carries exactly one value (15 bytes for the real case).

namespace detail {

inline void put_u64_le(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::vector<unsigned char>& out, double v) {
    put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline double get_f64_le(const unsigned char* p) {
    return std::bit_cast<double>(get_u64_le(p));
}

inline void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

inline void tnsr_put_header(std::vector<unsigned char>& out, unsigned char dtype,
                            const std::vector<std::size_t>& shape) {
    out.insert(out.end(), {'T', 'N', 'S', 'R'});
    out.push_back(1);
    out.push_back(dtype);
    if (shape.size() > 255) throw ValueError("tensor rank exceeds container limit of 255");
    out.push_back(static_cast<unsigned char>(shape.size()));
    for (std::size_t e : shape) put_u64_le(out, e);
}

}  // namespace detail

using TnsrValue = std::variant<Tensor, ComplexTensor>;

inline std::vector<unsigned char> tnsr_bytes(const Tensor& t) {
    std::vector<unsigned char> out;
    detail::tnsr_put_header(out, 0, t.shape());
    for (double v : t.data()) detail::put_f64_le(out, v);
    return out;
}

inline std::vector<unsigned char> tnsr_bytes(const ComplexTensor& t) {
    std::vector<unsigned char> out;
    detail::tnsr_put_header(out, 1, t.shape());
    for (const auto& z : t.data()) {
        detail::put_f64_le(out, z.real());
        detail::put_f64_le(out, z.imag());
    }
    return out;
}

inline void tnsr_write(const std::string& path, const Tensor& t) {
    detail::write_file_bytes(path, tnsr_bytes(t));
}

inline void tnsr_write(const std::string& path, const ComplexTensor& t) {
    detail::write_file_bytes(path, tnsr_bytes(t));
}

inline TnsrValue tnsr_parse(const std::vector<unsigned char>& bytes, const std::string& origin) {
    if (bytes.size() < 7) throw TruncatedError("truncated header: " + origin);
    if (bytes[0] != 'T' || bytes[1] != 'N' || bytes[2] != 'S' || bytes[3] != 'R')
        throw FormatError("bad magic: " + origin);
    if (bytes[4] != 1)
        throw FormatError("unsupported version " + std::to_string(bytes[4]) + ": " + origin);
    const unsigned char dtype = bytes[5];
    if (dtype != 0 && dtype != 1)
        throw FormatError("unsupported dtype " + std::to_string(dtype) + ": " + origin);
    const std::size_t rank = bytes[6];

    std::size_t off = 7;
    if (bytes.size() < off + 8 * rank) throw TruncatedError("truncated extents: " + origin);
    std::vector<std::size_t> shape(rank);
    for (std::size_t a = 0; a < rank; ++a) {
        shape[a] = static_cast<std::size_t>(detail::get_u64_le(bytes.data() + off));
        off += 8;
    }

    const std::size_t elems = Tensor::count(shape);
    const std::size_t values = elems * (dtype == 1 ? 2 : 1);
    if (bytes.size() < off + 8 * values) throw TruncatedError("truncated payload: " + origin);
    if (bytes.size() > off + 8 * values) throw FormatError("trailing bytes: " + origin);

    if (dtype == 0) {
        std::vector<double> data(elems);
        for (std::size_t i = 0; i < elems; ++i) data[i] = detail::get_f64_le(bytes.data() + off + 8 * i);
        return Tensor::from_data(std::move(shape), std::move(data));
    }
    std::vector<std::complex<double>> data(elems);
    for (std::size_t i = 0; i < elems; ++i) {
        const double re = detail::get_f64_le(bytes.data() + off + 16 * i);
        const double im = detail::get_f64_le(bytes.data() + off + 16 * i + 8);
        data[i] = {re, im};
    }
    return ComplexTensor::from_data(std::move(shape), std::move(data));
}

inline TnsrValue tnsr_read(const std::string& path) {
    return tnsr_parse(detail::read_file_bytes(path), path);
}

inline Tensor tnsr_read_real(const std::string& path) {
    TnsrValue v = tnsr_read(path);
    if (!std::holds_alternative<Tensor>(v))
        throw FormatError("expected real dtype: " + path);
    return std::get<Tensor>(std::move(v));
}

inline ComplexTensor tnsr_read_complex(const std::string& path) {
    TnsrValue v = tnsr_read(path);
    if (!std::holds_alternative<ComplexTensor>(v))
        throw FormatError("expected complex dtype: " + path);
    return std::get<ComplexTensor>(std::move(v));
}

}  // namespace ropewarp
