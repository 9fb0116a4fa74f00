import numpy as np
import pytest

from mapfsel.benchmark import (DEFAULT_PORTFOLIO, GridMap, ScenarioEntry, load_results,
                               parse_map, parse_scen, serialize_map, serialize_results,
                               serialize_scen)
from mapfsel.errors import DataError, ParseError

from conftest import grid_from_rows


def make_map_bytes(rows, height=None, width=None):
    height = len(rows) if height is None else height
    width = len(rows[0]) if width is None else width
    return (f"type octile\nheight {height}\nwidth {width}\nmap\n" + "\n".join(rows) + "\n").encode()


class TestParseMap:
    def test_basic_row(self):
        grid = parse_map(make_map_bytes([".@."]))
        assert (grid.height, grid.width) == (1, 3)
        assert grid.cells.tolist() == [[True, False, True]]

    def test_character_classes(self):
        grid = parse_map(make_map_bytes(["GT."]))
        assert grid.cells.tolist() == [[True, False, True]]
        grid = parse_map(make_map_bytes(["S@OW"]))
        assert grid.cells.tolist() == [[True, False, False, False]]

    def test_unknown_character_names_position(self):
        with pytest.raises(ParseError) as err:
            parse_map(make_map_bytes([".x."]))
        assert err.value.line == 5
        assert err.value.column == 2

    def test_crlf_accepted(self):
        data = make_map_bytes([".@", ".."]).replace(b"\n", b"\r\n")
        assert parse_map(data).cells.tolist() == [[True, False], [True, True]]

    def test_trailing_whitespace_rejected(self):
        with pytest.raises(ParseError):
            parse_map(make_map_bytes([".. ", "..."], width=3))

    def test_header_errors(self):
        with pytest.raises(ParseError):
            parse_map(b"type quad\nheight 1\nwidth 1\nmap\n.\n")
        with pytest.raises(ParseError):
            parse_map(b"type octile\nheight x\nwidth 1\nmap\n.\n")
        with pytest.raises(ParseError):
            parse_map(b"type octile\nheight 1\nwidth 1\nnope\n.\n")

    def test_row_count_mismatch(self):
        with pytest.raises(ParseError):
            parse_map(make_map_bytes(["..", ".."], height=3))

    def test_row_length_mismatch(self):
        with pytest.raises(ParseError):
            parse_map(make_map_bytes(["..", "..."], width=2))

    def test_roundtrip_is_byte_identical(self):
        raw = make_map_bytes(["G@.", ".TS", "W.O"])
        grid = parse_map(raw)
        assert serialize_map(grid) == raw

    def test_parse_is_deterministic(self):
        raw = make_map_bytes([".@.", "..."])
        assert parse_map(raw) == parse_map(raw)


class TestParseScen:
    def setup_method(self):
        self.grid = grid_from_rows(["." * 8] * 8, name="empty-8-8")

    def test_basic_entry(self):
        data = b"version 1\n0\tempty-8-8.map\t8\t8\t0\t0\t7\t7\t14.0\n"
        entries = parse_scen(data, self.grid)
        assert entries == [ScenarioEntry(bucket=0, map_name="empty-8-8.map", map_width=8,
                                         map_height=8, start=(0, 0), goal=(7, 7),
                                         optimal_length=14.0)]

    def test_empty_body(self):
        assert parse_scen(b"version 1\n", self.grid) == []

    def test_missing_version(self):
        with pytest.raises(ParseError):
            parse_scen(b"0\tm\t8\t8\t0\t0\t1\t1\t2.0\n", self.grid)

    def test_field_count(self):
        with pytest.raises(ParseError):
            parse_scen(b"version 1\n0\tm\t8\t8\t0\t0\t1\t1\n", self.grid)

    def test_non_numeric_field(self):
        with pytest.raises(ParseError):
            parse_scen(b"version 1\n0\tm\t8\t8\tzero\t0\t1\t1\t2.0\n", self.grid)

    def test_blocked_start_reports_line(self):
        grid = grid_from_rows(["@.", ".."])
        with pytest.raises(ParseError) as err:
            parse_scen(b"version 1\n0\tm\t2\t2\t0\t0\t1\t1\t2.0\n", grid)
        assert err.value.line == 2

    def test_out_of_bounds_goal(self):
        with pytest.raises(ParseError):
            parse_scen(b"version 1\n0\tm\t8\t8\t0\t0\t8\t0\t2.0\n", self.grid)

    def test_roundtrip_random_scenarios(self, rng):
        # Property: parse(serialize(entries)) == entries for valid entries.
        for _ in range(50):
            w = int(rng.integers(2, 12))
            h = int(rng.integers(2, 12))
            grid = GridMap.from_passable(np.ones((h, w), bool), name="g")
            n = int(rng.integers(0, 12))
            entries = []
            for i in range(n):
                sx, sy, gx, gy = (int(rng.integers(0, w)), int(rng.integers(0, h)),
                                  int(rng.integers(0, w)), int(rng.integers(0, h)))
                entries.append(ScenarioEntry(bucket=i // 10, map_name="g.map", map_width=w,
                                             map_height=h, start=(sx, sy), goal=(gx, gy),
                                             optimal_length=float(abs(sx - gx) + abs(sy - gy))))
            assert parse_scen(serialize_scen(entries), grid) == entries


def results_csv(rows):
    head = "grid,scenario,num_agents,solver,runtime_min,solved\n"
    return (head + "".join(r + "\n" for r in rows)).encode()


class TestLoadResults:
    def test_grouping(self):
        data = results_csv(["g,s,2,ICTS,1.0,true", "g,s,2,EPEA*,2.0,true"])
        records = load_results(data, portfolio=("ICTS", "EPEA*"))
        assert len(records) == 1
        assert records[0].solver_runtimes == {"ICTS": (1.0, True), "EPEA*": (2.0, True)}

    def test_unsolved_forced_to_cap(self):
        data = results_csv(["g,s,2,ICTS,3.2,false"])
        records = load_results(data, portfolio=("ICTS",))
        assert records[0].solver_runtimes["ICTS"] == (5.0, False)

    def test_duplicate_rejected(self):
        data = results_csv(["g,s,2,ICTS,1.0,true", "g,s,2,ICTS,2.0,true"])
        with pytest.raises(ParseError):
            load_results(data, portfolio=("ICTS",))

    def test_unknown_solver(self):
        data = results_csv(["g,s,2,BOGUS,1.0,true"])
        with pytest.raises(ParseError):
            load_results(data)

    def test_negative_runtime(self):
        data = results_csv(["g,s,2,ICTS,-1.0,true"])
        with pytest.raises(ParseError):
            load_results(data, portfolio=("ICTS",))

    def test_strict_missing_solver(self):
        data = results_csv(["g,s,2,ICTS,1.0,true"])
        with pytest.raises(DataError):
            load_results(data, portfolio=("ICTS", "EPEA*"), strict=True)

    def test_lenient_completes_unsolved(self):
        data = results_csv(["g,s,2,ICTS,1.0,true"])
        records = load_results(data, portfolio=("ICTS", "EPEA*"), strict=False)
        assert records[0].solver_runtimes["EPEA*"] == (5.0, False)

    def test_runtimes_always_within_cap(self, rng):
        rows = []
        for i in range(200):
            solved = rng.random() < 0.8
            rows.append(f"g,s{i},2,ICTS,{float(rng.uniform(0, 9)):.3f},{'true' if solved else 'false'}")
        records = load_results(results_csv(rows), portfolio=("ICTS",))
        for rec in records:
            for runtime, _ in rec.solver_runtimes.values():
                assert 0.0 <= runtime <= 5.0

    def test_bad_header(self):
        with pytest.raises(ParseError):
            load_results(b"a,b,c\n")

    def test_roundtrip_serialize(self):
        data = results_csv(["g,s,2,ICTS,1.0,true", "g,s,2,EPEA*,5.0,false"])
        records = load_results(data, portfolio=("ICTS", "EPEA*"))
        again = load_results(serialize_results(records, ("ICTS", "EPEA*")),
                             portfolio=("ICTS", "EPEA*"))
        assert again == records

    def test_default_portfolio_names(self):
        rows = [f"g,s,1,{name},0.5,true" for name in DEFAULT_PORTFOLIO]
        records = load_results(results_csv(rows))
        assert set(records[0].solver_runtimes) == set(DEFAULT_PORTFOLIO)
