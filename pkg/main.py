#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# main.py
# Version: 1.0.0
# Description: Command-line entry point (kcent edge|vertex|compare|kirchhoff)
# Changelog:
# 1.0.0 - Initial implementation

import argparse
import logging
import sys
from typing import List, Optional

from src.centrality_manager import COMMANDS, CentralityManager, RunConfig, format_value
from src.centrality_report import CentralityReport
from src.config_manager import ConfigManager
from src.utils.logger import CustomLogger


def setup_logging(config_manager: ConfigManager, level: Optional[str] = None) -> logging.Logger:
    """Configure the root logger from the [logging] section"""
    log_config = config_manager.logging_config()
    if level:
        log_config['level'] = level.upper()
    return CustomLogger('', log_config).get_logger()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='kcent',
        description='theta-Kirchhoff edge and vertex centrality',
    )
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--input', '-i', action='append', required=True,
                        help='graph file; repeat for compare')
    parser.add_argument('--format', dest='fmt', choices=('edgelist', 'gml'),
                        help='input format (default: from the file extension)')
    parser.add_argument('--method', help='exact | quad-est | sherman-morrison | vertex')
    parser.add_argument('--theta', type=float, help='deletion factor in (0, 1/2]')
    parser.add_argument('--eps', type=float, help='multiplicative error target in (0, 1/2]')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--delta-mode', action='store_true',
                        help='report the increase C_theta^Delta instead of C_theta')
    parser.add_argument('--jobs', type=int, help='threads for probe evaluation')
    parser.add_argument('--output', '-o', help='CSV output path')
    parser.add_argument('--top', type=int, help='keep only the K highest values')
    parser.add_argument('--theta-sweep', type=float, nargs='+',
                        help='compare: evaluate every listed theta')
    parser.add_argument('--dense-cap', type=int, help='largest n for dense pseudoinverses')
    parser.add_argument('--jl-constant', type=float, help='JL width constant in er_est')
    parser.add_argument('--trace-constant', type=float,
                        help='override every Monte-Carlo probe constant')
    parser.add_argument('--config', help='INI configuration file')
    parser.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR')
    return parser


def build_run_config(args: argparse.Namespace, manager: CentralityManager) -> RunConfig:
    defaults = manager.config_manager.run_defaults()
    trace = args.trace_constant
    settings = manager.settings.with_overrides(
        jobs=args.jobs,
        dense_cap=args.dense_cap,
        jl_constant=args.jl_constant,
        edge_trace_constant=trace,
        sm_trace_constant=trace,
        hutchinson_constant=trace,
    )
    return RunConfig(
        command=args.command,
        inputs=args.input,
        fmt=args.fmt,
        method=args.method,
        theta=args.theta if args.theta is not None else defaults['theta'],
        eps=args.eps if args.eps is not None else defaults['eps'],
        seed=args.seed if args.seed is not None else defaults['seed'],
        output=args.output,
        delta=args.delta_mode,
        top=args.top,
        theta_sweep=args.theta_sweep,
        settings=settings,
    )


def _print_result(result) -> None:
    if isinstance(result, CentralityReport):
        for key, value in result.top(10):
            print(f"{key}\t{format_value(value)}")
    elif isinstance(result, float):
        print(format_value(result))
    else:
        print(result.to_string(index=False))


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function"""
    args = build_parser().parse_args(argv)
    logger = logging.getLogger(__name__)
    try:
        config_manager = ConfigManager(args.config)
        logger = setup_logging(config_manager, args.log_level)
        logger.info(f"Starting kcent {args.command}")

        manager = CentralityManager(config_manager=config_manager)
        result = manager.run(build_run_config(args, manager))
        if args.output is None:
            _print_result(result)

        logger.info(f"kcent {args.command} completed successfully")
        return 0

    except Exception as e:
        logger.error(f"Error in main execution: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    sys.exit(main())
