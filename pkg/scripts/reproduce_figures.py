#!/usr/bin/env python3
"""Emit the five analytic gain-curve CSVs into an output directory."""
import argparse

from lacsim.figures import write_figures


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/figures", help="output directory")
    args = parser.parse_args()
    for path in write_figures(args.out):
        print(path)


if __name__ == "__main__":
    main()
