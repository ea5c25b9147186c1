#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Mobility co-design toolkit - shared helpers

Provides the pieces every other module leans on: logging setup, the exception
hierarchy, number/path formatting, content hashing and the Excel export of
result tables.
"""

import os
import json
import hashlib
import logging
from typing import Any, Dict, Iterable, Optional

import pandas as pd
from openpyxl.utils import get_column_letter
from openpyxl.styles import Font, PatternFill, Alignment, Border, Side

logger = logging.getLogger("codesign_utils")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class CodesignError(Exception):
    """Base class for all errors raised by the toolkit."""


class DimensionError(CodesignError):
    """Points or antichains from different spaces were combined."""


class CompositionError(CodesignError):
    """Design problems or diagram edges do not fit together."""


class ConfigurationError(CodesignError):
    """A scenario, parameter set or catalog is inconsistent."""


class NetworkBuildError(CodesignError):
    """The network or the demand cannot be turned into a flow problem."""


def setup_logging(level=logging.INFO):
    """
    配置根日志记录器

    Args:
        level (int): logging level for the whole process
    """
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)
    # matplotlib is chatty at DEBUG
    logging.getLogger("matplotlib").setLevel(logging.WARNING)


def format_number(number, digits=2):
    """
    格式化数字，添加千位分隔符

    Args:
        number: value to format
        digits (int): decimals for non-integers

    Returns:
        str: formatted number, "N/A" for None
    """
    if number is None:
        return "N/A"

    try:
        if float(number).is_integer():
            return f"{int(number):,}"
        return f"{float(number):,.{digits}f}"
    except (ValueError, TypeError, OverflowError):
        return str(number)


def format_money_per_month(usd):
    """Render a $/month amount in millions, e.g. ``12.33 M$/month``."""
    if usd is None:
        return "N/A"
    return f"{usd / 1e6:,.2f} M$/month"


def ensure_dir(directory: str) -> None:
    """
    确保目录存在，如果不存在则创建

    Args:
        directory: directory path
    """
    if not os.path.exists(directory):
        os.makedirs(directory)
        logger.info(f"创建目录: {directory}")


def resolve_path(path: str, base_dir: Optional[str]) -> str:
    """Resolve ``path`` relative to ``base_dir`` unless it is absolute."""
    if os.path.isabs(path) or not base_dir:
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def get_display_path(file_path: str, max_length: int = 60) -> str:
    """
    获取用于显示的文件路径

    Paths inside the working directory are shown relative to it. A path
    still longer than ``max_length`` keeps its trailing components behind
    ``.../``; a file name that alone is too long keeps its tail.
    """
    if not file_path:
        return "[无路径]"

    shown = file_path
    if os.path.isabs(file_path):
        try:
            relative = os.path.relpath(file_path)
        except ValueError:  # another drive
            relative = os.pardir
        if relative != os.pardir and not relative.startswith(os.pardir + os.sep):
            shown = relative
    if len(shown) <= max_length:
        return shown

    parts = shown.split(os.sep)
    tail = parts[-1]
    if len(tail) + 4 > max_length:
        return f"...{tail[-(max_length - 3):]}"
    for part in reversed(parts[:-1]):
        candidate = os.path.join(part, tail)
        if len(candidate) + 4 > max_length:
            break
        tail = candidate
    return os.path.join("...", tail)


def canonical_json(data: Any) -> str:
    """JSON text with sorted keys and no whitespace variance, for hashing."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(parts: Iterable[bytes]) -> str:
    """
    计算内容哈希

    Args:
        parts: byte chunks in a fixed order

    Returns:
        str: hex sha256 of the concatenated, length-prefixed chunks
    """
    digest = hashlib.sha256()
    for part in parts:
        digest.update(len(part).to_bytes(8, "big"))
        digest.update(part)
    return digest.hexdigest()


def file_bytes(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def write_results_workbook(sheets: Dict[str, pd.DataFrame], output_file: str) -> bool:
    """
    用美观的格式保存结果工作簿

    Args:
        sheets: sheet name -> table, written in the given order
        output_file: .xlsx path

    Returns:
        bool: True when the workbook was written
    """
    try:
        writer = pd.ExcelWriter(output_file, engine='openpyxl')

        header_font = Font(bold=True, size=12, color="FFFFFF")
        header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
        header_alignment = Alignment(horizontal='center', vertical='center', wrap_text=True)
        thin_border = Border(
            left=Side(style='thin'),
            right=Side(style='thin'),
            top=Side(style='thin'),
            bottom=Side(style='thin')
        )

        for sheet_name, df in sheets.items():
            df.to_excel(writer, index=False, sheet_name=sheet_name)
            worksheet = writer.sheets[sheet_name]

            for idx, col in enumerate(df.columns):
                column_letter = get_column_letter(idx + 1)
                col_width = 15
                if col in ("av_entry", "mm_entry", "status"):
                    col_width = 20
                elif col.startswith(("cost", "co2")):
                    col_width = 22
                worksheet.column_dimensions[column_letter].width = col_width

            for col_num in range(1, len(df.columns) + 1):
                cell = worksheet.cell(row=1, column=col_num)
                cell.font = header_font
                cell.fill = header_fill
                cell.alignment = header_alignment

            for row in range(1, len(df) + 2):
                for col_num in range(1, len(df.columns) + 1):
                    worksheet.cell(row=row, column=col_num).border = thin_border

        writer.close()
        logger.info(f"Excel文件已保存: {output_file}")
        return True
    except Exception as e:
        logger.error(f"保存Excel格式化文件失败: {str(e)}")
        return False
