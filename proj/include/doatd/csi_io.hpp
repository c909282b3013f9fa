// SPDX-License-Identifier: Apache-2.0
//
// doatd - joint DOA and time-delay estimation for frequency-domain array data
// Copyright (C) 2026 The doatd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef DOATD_CSI_IO_HPP
#define DOATD_CSI_IO_HPP

#include "doatd/error.hpp"
#include "doatd/signal_model.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

// CSI matrix text format (UTF-8 CSV):
//   line 1: M,K_total,carrier_hz,spacing_hz
//   line 2: comma-separated active bin indices (K of them)
//   then M rows of K entries, each formatted re+imj / re-imj

namespace doatd
{
    // Contents of a CSI file; geometry is not stored in the file.
    struct CsiFile
    {
        std::size_t sensors = 0;
        SubcarrierGrid grid;
        MatrixXcd data;
    };

    namespace detail
    {
        inline std::string format_real(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        inline std::string format_complex(cd v)
        {
            char buf[80];
            std::snprintf(buf, sizeof buf, "%.17g%+.17gj", v.real(), v.imag());
            return buf;
        }

        inline std::vector<std::string> split_csv(const std::string &line)
        {
            std::vector<std::string> out;
            std::string field;
            std::istringstream ss(line);
            while (std::getline(ss, field, ','))
                out.push_back(field);
            if (!line.empty() && line.back() == ',')
                out.emplace_back();
            return out;
        }

        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        inline double parse_real(const std::string &raw, const std::string &where)
        {
            const std::string s = trim(raw);
            char *end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size())
                throw io_error(where + ": cannot parse number '" + s + "'");
            return v;
        }

        inline std::size_t parse_index(const std::string &raw, const std::string &where)
        {
            const std::string s = trim(raw);
            char *end = nullptr;
            const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
            if (s.empty() || s[0] == '-' || end != s.c_str() + s.size())
                throw io_error(where + ": cannot parse index '" + s + "'");
            return static_cast<std::size_t>(v);
        }

        inline cd parse_complex(const std::string &raw, const std::string &where)
        {
            const std::string s = trim(raw);
            const char *p = s.c_str();
            char *end = nullptr;
            const double re = std::strtod(p, &end);
            if (end == p)
                throw io_error(where + ": cannot parse complex entry '" + s + "'");
            const char *q = end;
            if (*q != '+' && *q != '-')
                throw io_error(where + ": complex entry '" + s + "' lacks an imaginary part");
            const double im = std::strtod(q, &end);
            if (end == q || *end != 'j' || end + 1 != p + s.size())
                throw io_error(where + ": complex entry '" + s + "' must look like re+imj");
            return {re, im};
        }
    }

    inline void write_csi_csv(std::ostream &os, const CsiMatrix &csi)
    {
        const SubcarrierGrid &g = csi.grid;
        os << csi.sensors() << ',' << g.total_bins() << ',' << detail::format_real(g.carrier_hz()) << ','
           << detail::format_real(g.spacing_hz()) << '\n';
        const auto bins = g.active_bins();
        for (std::size_t k = 0; k < bins.size(); ++k)
            os << (k ? "," : "") << bins[k];
        os << '\n';
        for (Eigen::Index m = 0; m < csi.data.rows(); ++m)
        {
            for (Eigen::Index k = 0; k < csi.data.cols(); ++k)
                os << (k ? "," : "") << detail::format_complex(csi.data(m, k));
            os << '\n';
        }
    }

    inline CsiFile read_csi_csv(std::istream &is)
    {
        std::string line;
        if (!std::getline(is, line))
            throw io_error("CSI file: missing header line");
        const auto head = detail::split_csv(line);
        if (head.size() != 4)
            throw io_error("CSI file line 1: expected M,K_total,carrier_hz,spacing_hz");
        const std::size_t sensors = detail::parse_index(head[0], "CSI file line 1");
        const std::size_t total = detail::parse_index(head[1], "CSI file line 1");
        const double carrier = detail::parse_real(head[2], "CSI file line 1");
        const double spacing = detail::parse_real(head[3], "CSI file line 1");
        if (sensors == 0)
            throw io_error("CSI file line 1: sensor count must be positive");

        if (!std::getline(is, line))
            throw io_error("CSI file: missing active bin line");
        std::vector<std::size_t> bins;
        for (const auto &f : detail::split_csv(line))
            bins.push_back(detail::parse_index(f, "CSI file line 2"));

        CsiFile out{sensors, [&] {
                        try
                        {
                            return SubcarrierGrid(carrier, spacing, total, bins);
                        }
                        catch (const config_error &e)
                        {
                            throw io_error(std::string("CSI file: invalid subcarrier grid: ") + e.what());
                        }
                    }(),
                    MatrixXcd()};
        const auto K = static_cast<Eigen::Index>(bins.size());
        // rows are read before the matrix is sized, so a bogus M in the header cannot force a huge allocation
        std::vector<VectorXcd> rows;
        for (std::size_t m = 0; m < sensors; ++m)
        {
            const std::string where = "CSI file line " + std::to_string(m + 3);
            if (!std::getline(is, line))
                throw io_error(where + ": missing sensor row");
            const auto fields = detail::split_csv(line);
            if (static_cast<Eigen::Index>(fields.size()) != K)
                throw io_error(where + ": expected " + std::to_string(K) + " entries, found " +
                               std::to_string(fields.size()));
            VectorXcd row(K);
            for (Eigen::Index k = 0; k < K; ++k)
                row(k) = detail::parse_complex(fields[static_cast<std::size_t>(k)], where);
            rows.push_back(std::move(row));
        }
        out.data.resize(static_cast<Eigen::Index>(sensors), K);
        for (std::size_t m = 0; m < sensors; ++m)
            out.data.row(static_cast<Eigen::Index>(m)) = rows[m].transpose();
        while (std::getline(is, line))
            if (!detail::trim(line).empty())
                throw io_error("CSI file: unexpected content after the last sensor row");
        return out;
    }
}

#endif
