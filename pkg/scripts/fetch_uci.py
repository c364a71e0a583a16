"""Obtain the UCI "default of credit card clients" table in its original column layout.

The ethicml wheel on PyPI bundles a copy of the table (30000 rows) in which
EDUCATION and MARRIAGE are already one-hot encoded and SEX is recoded to
{0, 1}. This script pulls that copy (or reads a local one) and inverts both
recodings so the result has the UCI header and codes.

    python scripts/fetch_uci.py --out data/uci_credit_default.csv
    python scripts/fetch_uci.py --from-csv UCI_Credit_Card.csv --out data/uci_credit_default.csv
"""

import argparse
import csv
import hashlib
import io
import sys
import time
import urllib.request
import zipfile
from pathlib import Path

from credit_default.tabular import UCI_FEATURES, UCI_LABEL

WHEEL_URL = ("https://files.pythonhosted.org/packages/ae/98/"
             "207e9776732175d262f38411d519347a820c066fa01cbc845e99aa909c84/"
             "ethicml-1.3.0-py3-none-any.whl")
MEMBER = "ethicml/data/csvs/UCI_Credit_Card.csv"
SOURCE_SHA256 = "af36211f57585cff1a7a788ef3e0d52aecfac301893acaa7373d7f7d72a7f9d5"


def download(url: str, retries: int = 5) -> bytes:
    for attempt in range(retries):
        try:
            with urllib.request.urlopen(url, timeout=120) as resp:
                return resp.read()
        except OSError as exc:
            print(f"download failed ({exc}); retry {attempt + 1}/{retries}", file=sys.stderr)
            time.sleep(5 * (attempt + 1))
    raise SystemExit(f"could not download {url}")


def _int(text: str) -> str:
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer code, got {text!r}")
    return str(int(value))


def convert(raw: bytes) -> list:
    reader = csv.DictReader(io.StringIO(raw.decode("utf-8")))
    edu = sorted((c for c in reader.fieldnames if c.startswith("EDUCATION_")), key=lambda c: int(c.split("_")[1]))
    mar = sorted((c for c in reader.fieldnames if c.startswith("MARRIAGE_")), key=lambda c: int(c.split("_")[1]))
    rows = []
    for rec in reader:
        hot_e = [c for c in edu if float(rec[c]) == 1]
        hot_m = [c for c in mar if float(rec[c]) == 1]
        if len(hot_e) != 1 or len(hot_m) != 1:
            raise ValueError(f"row ID={rec['ID']}: indicator block is not one-hot")
        out = {
            "ID": _int(rec["ID"]),
            # ethicml stores female (UCI code 2) as 1 and male (UCI code 1) as 0
            "SEX": "2" if float(rec["SEX"]) == 1 else "1",
            "EDUCATION": hot_e[0].split("_")[1],
            "MARRIAGE": hot_m[0].split("_")[1],
            UCI_LABEL: _int(rec["default-payment-next-month"]),
        }
        for col in UCI_FEATURES:
            if col not in out:
                out[col] = _int(rec[col])
        rows.append(out)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/uci_credit_default.csv")
    ap.add_argument("--from-csv", help="local copy of the ethicml-format CSV")
    ap.add_argument("--from-wheel", help="local copy of the ethicml wheel")
    args = ap.parse_args(argv)

    if args.from_csv:
        raw = Path(args.from_csv).read_bytes()
    else:
        wheel = Path(args.from_wheel).read_bytes() if args.from_wheel else download(WHEEL_URL)
        raw = zipfile.ZipFile(io.BytesIO(wheel)).read(MEMBER)
    digest = hashlib.sha256(raw).hexdigest()
    if digest != SOURCE_SHA256:
        print(f"warning: source checksum {digest} differs from the expected one", file=sys.stderr)
    rows = convert(raw)
    header = ["ID", *UCI_FEATURES, UCI_LABEL]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
