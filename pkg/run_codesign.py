#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
交通协同设计命令行工具

使用:
    # 验证场景（不求解）
    python run_codesign.py validate scenarios/s1.json

    # 求解场景，4个进程并行
    python run_codesign.py solve scenarios/s1.json --jobs 4 --excel

    # 由结果目录生成阶梯图数据
    python run_codesign.py plot-data results/s1 --png

Exit codes: 0 ok, 1 validation or solve failure, 2 unreadable input.
"""

import sys
import logging
import argparse
import traceback

from codesign_utils import setup_logging
from scenario_runner import EXIT_FAILED, cmd_plotdata, cmd_solve, cmd_validate


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('config', help='场景配置文件 (JSON)')
    parser.add_argument('--jobs', dest='jobs', type=int, default=None,
                        help='并行求解的进程数')
    parser.add_argument('--dump-lp', dest='dump_lp', action='store_true', default=None,
                        help='将每个设计点的线性规划导出为LP文件')
    parser.add_argument('--emission-price', dest='emission_price', type=float, default=None,
                        help='碳排放价格 (USD/kg)，默认40')
    parser.add_argument('--hours-per-month', dest='hours_per_month', type=float, default=None,
                        help='每月运营小时数，默认730')
    parser.add_argument('--backend', dest='backend', choices=['simplex', 'highs'], default=None,
                        help='线性规划求解器')
    parser.add_argument('--output-dir', dest='output_dir', default=None,
                        help='结果输出目录')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='交通系统协同设计工具')
    parser.add_argument('-v', '--verbose', dest='verbose', action='store_true',
                        help='输出调试日志和完整错误堆栈')
    subparsers = parser.add_subparsers(dest='command', required=True)

    validate = subparsers.add_parser('validate', help='验证场景配置与网络')
    _add_scenario_flags(validate)

    solve = subparsers.add_parser('solve', help='求解场景并保存结果')
    _add_scenario_flags(solve)
    solve.add_argument('--excel', dest='excel', action='store_true',
                       help='另存一份带格式的Excel结果表')
    solve.add_argument('--no-progress', dest='progress', action='store_false',
                       help='不显示进度条')

    plot = subparsers.add_parser('plot-data', help='由结果目录生成阶梯图数据')
    plot.add_argument('results_dir', help='solve 命令的输出目录')
    plot.add_argument('--png', dest='png', action='store_true',
                      help='同时绘制 staircase.png')
    return parser


def main(argv=None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else logging.WARNING)

    try:
        if args.command == 'plot-data':
            return cmd_plotdata(args.results_dir, png=args.png)

        overrides = {'jobs': args.jobs, 'dump_lp': args.dump_lp, 'emission_price': args.emission_price,
                     'hours_per_month': args.hours_per_month, 'backend': args.backend,
                     'output_dir': args.output_dir}
        if args.command == 'validate':
            return cmd_validate(args.config, overrides, verbose=args.verbose)
        return cmd_solve(args.config, overrides, excel=args.excel, progress=args.progress,
                         verbose=args.verbose)
    except KeyboardInterrupt:
        print("\n⚠️ 已中断")
        return EXIT_FAILED
    except Exception as e:
        print(f"❌ 运行出错: {str(e)}")
        traceback.print_exc()
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
