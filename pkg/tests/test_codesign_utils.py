import os

import pandas as pd
import pytest
from openpyxl import load_workbook

from codesign_utils import (content_hash, format_money_per_month, format_number, get_display_path,
                            resolve_path, write_results_workbook)


@pytest.mark.parametrize("value, expected", [
    (1234567, "1,234,567"),
    (1234.5678, "1,234.57"),
    (None, "N/A"),
    ("abc", "abc"),
])
def test_format_number(value, expected):
    assert format_number(value) == expected


def test_format_money_per_month():
    assert format_money_per_month(12.333e6) == "12.33 M$/month"
    assert format_money_per_month(None) == "N/A"


def test_content_hash_separates_chunks():
    assert content_hash([b"ab", b"c"]) != content_hash([b"a", b"bc"])
    assert content_hash([b"ab", b"c"]) == content_hash([b"ab", b"c"])


def test_resolve_path(tmp_path):
    assert resolve_path("data/x.csv", str(tmp_path)) == os.path.join(str(tmp_path), "data", "x.csv")
    assert resolve_path("/abs/x.csv", str(tmp_path)) == "/abs/x.csv"


class TestDisplayPath:
    def test_long_path_keeps_whole_trailing_directories(self):
        path = "/very/long/" + "nested/" * 20 + "front3d.csv"
        shown = get_display_path(path, max_length=40)
        assert shown == os.path.join("...", "nested", "nested", "nested", "front3d.csv")
        assert len(shown) <= 40

    def test_inside_the_working_directory_is_relative(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        path = os.path.join(os.getcwd(), "results", "s1", "front3d.csv")
        assert get_display_path(path) == os.path.join("results", "s1", "front3d.csv")

    def test_short_path_unchanged(self):
        assert get_display_path("scenarios/s1.json") == "scenarios/s1.json"

    def test_long_file_name_keeps_its_tail(self):
        shown = get_display_path("/x/" + "a" * 50 + ".csv", max_length=20)
        assert shown == "..." + "a" * 13 + ".csv"

    def test_empty(self):
        assert get_display_path("") == "[无路径]"


def test_results_workbook(tmp_path):
    path = str(tmp_path / "results.xlsx")
    front = pd.DataFrame({"t_avg_s": [600.0, 500.0], "cost_usd_per_month": [1e7, 2e7]})
    assert write_results_workbook({"front3d": front, "front2d": front.head(1)}, path)
    workbook = load_workbook(path)
    assert workbook.sheetnames == ["front3d", "front2d"]
    sheet = workbook["front3d"]
    assert sheet["A1"].value == "t_avg_s"
    assert sheet["A1"].font.bold
    assert sheet.max_row == 3
    assert sheet.column_dimensions["B"].width == 22
