# src/report.py
"""
Static PDF report of the CSV results in an output directory.

Responsible for:
- a parameter box built from the JSON envelopes next to the CSVs
- d.o.f. against m, with the converse constant as a reference line
- symbol error rate against P
- point-to-point PAM reliable rate against (1/2) log2 P
"""

import io
import json
import logging
import math
import os
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
from reportlab.lib.pagesizes import A4  # noqa: E402
from reportlab.lib.units import cm  # noqa: E402
from reportlab.lib.utils import ImageReader  # noqa: E402
from reportlab.pdfgen import canvas  # noqa: E402

from config import LIBRARY_VERSION  # noqa: E402
from errors import InvalidArgument  # noqa: E402

logger = logging.getLogger(__name__)

FONT_REGULAR = "Helvetica"
FONT_BOLD = "Helvetica-Bold"

REPORT_SOURCES = ("rates", "simulate", "pam")


def _load(output_dir: str, name: str) -> Optional[pd.DataFrame]:
    path = os.path.join(output_dir, f"{name}.csv")
    if not os.path.exists(path):
        return None
    return pd.read_csv(path)


def _load_json(output_dir: str, name: str) -> Optional[Dict]:
    path = os.path.join(output_dir, f"{name}.json")
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _chart(frames: Dict[str, pd.DataFrame], pam_slope: Optional[float]) -> io.BytesIO:
    fig, axes = plt.subplots(len(frames), 1, figsize=(6, 3.2 * len(frames)), squeeze=False)
    axes = axes[:, 0]

    for ax, (name, df) in zip(axes, frames.items()):
        if name == "rates":
            dof = df.groupby("m", sort=True)["dof_coeff"].first()
            ax.plot(dof.index, dof.values, marker="o", color="#2980b9", label="achievable sum d.o.f.")
            ax.axhline(df["converse_dof"].iloc[0], color="#e74c3c", linestyle="--", label="converse K(K-1)/(2K-1)")
            if dof.index.max() > 10 * max(dof.index.min(), 1):
                ax.set_xscale("log")
            ax.set_xlabel("m", fontsize=9)
            ax.set_ylabel("sum secure d.o.f.", fontsize=9)
            ax.set_title(f"Secure d.o.f. against m (K={int(df['K'].iloc[0])})", fontsize=10, fontweight="bold")
        elif name == "simulate":
            ax.plot(df["P"], df["pe_estimate"], marker="s", color="#8e44ad", label="symbol error rate")
            ax.set_xscale("log")
            ax.set_xlabel("P", fontsize=9)
            ax.set_ylabel("Pe (receiver 1)", fontsize=9)
            ax.set_title("Nearest-point decoding error rate", fontsize=10, fontweight="bold")
        else:
            x = [0.5 * math.log2(p) for p in df["P"]]
            label = "Fano reliable rate" if pam_slope is None else f"Fano reliable rate (slope {pam_slope:.3f})"
            ax.plot(x, df["rate_bits"], marker="^", color="#27ae60", label=label)
            ax.set_xlabel("(1/2) log2 P", fontsize=9)
            ax.set_ylabel("rate (bits)", fontsize=9)
            ax.set_title("Point-to-point PAM", fontsize=10, fontweight="bold")
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)

    plt.tight_layout()
    buffer = io.BytesIO()
    plt.savefig(buffer, format="png", dpi=150, metadata={"Software": None})
    plt.close(fig)
    buffer.seek(0)
    return buffer


def _parameter_lines(envelopes: Dict[str, Dict]) -> List[str]:
    lines = []
    for name, doc in envelopes.items():
        cfg = doc.get("config", {})
        line = f"{name}: K={cfg.get('K')}"
        if name == "rates":
            line += f", delta={cfg.get('delta')}, m*={doc.get('positive_rate_threshold')}"
        elif name == "simulate":
            line += f", m={cfg.get('m')}, trials={cfg.get('trials')}, seed={cfg.get('seed')}"
        else:
            line = f"{name}: delta={cfg.get('delta')}, trials={cfg.get('trials')}, seed={cfg.get('seed')}"
        lines.append(line)
    return lines


def generate_pdf_report(output_dir: str, output_path: str) -> str:
    frames = {name: df for name in REPORT_SOURCES if (df := _load(output_dir, name)) is not None}
    if not frames:
        raise InvalidArgument(f"No rates.csv, simulate.csv or pam.csv in {output_dir}")
    envelopes = {name: doc for name in frames if (doc := _load_json(output_dir, name)) is not None}
    pam_slope = envelopes.get("pam", {}).get("dof_slope")

    c = canvas.Canvas(output_path, pagesize=A4, invariant=1)
    width, height = A4

    c.setFont(FONT_BOLD, 20)
    c.setFillColorRGB(0.1, 0.2, 0.5)
    c.drawString(2 * cm, height - 3 * cm, "Secure real alignment: results")

    c.setFont(FONT_REGULAR, 10)
    c.setFillColorRGB(0.3, 0.3, 0.3)
    c.drawString(2 * cm, height - 3.7 * cm, f"secure-alignment-lab {LIBRARY_VERSION} | sources: {', '.join(frames)}")

    lines = _parameter_lines(envelopes)
    box_height = 0.6 * cm * max(len(lines), 1) + 0.8 * cm
    c.setStrokeColorRGB(0.8, 0.8, 0.8)
    c.roundRect(2 * cm, height - 4.2 * cm - box_height, 17 * cm, box_height, 0.2 * cm, stroke=1, fill=0)
    c.setFillColorRGB(0, 0, 0)
    y_pos = height - 4.8 * cm
    for line in lines or ["no JSON envelopes found"]:
        c.drawString(2.5 * cm, y_pos, line)
        y_pos -= 0.6 * cm

    image = ImageReader(_chart(frames, pam_slope))
    img_w, img_h = image.getSize()
    draw_w = 15 * cm
    draw_h = min(draw_w * img_h / img_w, y_pos - 2 * cm)
    c.drawImage(image, 3 * cm, y_pos - 0.4 * cm - draw_h, width=draw_w, height=draw_h, preserveAspectRatio=True)

    c.save()
    logger.info("Report written to %s", output_path)
    return output_path
