import sys
import logging
import streamlit as st
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent.parent
sys.path.append(str(project_root))

from app.core.errors import BenchError
from app.core.metrics import read_results
from app.core.presets import known_names
from app.core.preview import contact_sheet, preview_tiles
from app.core.raster import png_bytes, read_png_bytes
from app.core.report import describe_verdicts
from app.core.stats import PairOn
from app.core.textdata import FitMode
from models.config import BenchConfig, SplitView
from models.experiment import ExperimentSpec, compare_results


st.set_page_config(
    page_title="stenobench",
    layout="wide",
    initial_sidebar_state="collapsed"
)

logger = logging.getLogger(__name__)


def render_preview_tab(config):
    """Augmentation preview: upload a line image and inspect a preset"""
    col1, col2 = st.columns([2, 1])
    with col1:
        upload = st.file_uploader("Choose a line image (PNG)", type=["png"], key="preview_upload")
    with col2:
        preset = st.selectbox("Preset", known_names(), index=known_names().index("rot1.5"))
        seed = st.number_input("Seed", min_value=0, value=config["seed"], step=1)
        count = st.slider("Tiles", min_value=1, max_value=12, value=4)
        invert = st.checkbox("Invert (dark text on light background)", value=False)
        luma = st.checkbox("Convert colour images", value=False)

    if not upload:
        st.info("Upload a line image to preview augmentations.")
        return

    try:
        img = read_png_bytes(upload.getvalue(), luma=luma, invert_intensity=invert, source=upload.name)
        with st.spinner("Rendering preview..."):
            tiles = preview_tiles(preset, img, int(seed), int(count), FitMode.SHRINK)
        st.image(png_bytes(contact_sheet(tiles)), caption=f"{preset}, seed {seed}: range extremes first, "
                                                         f"grey marks augmentation padding")
        st.download_button("Download contact sheet",
                           png_bytes(contact_sheet(tiles), text={"seed": str(seed), "preset": preset}),
                           file_name=f"preview-{preset}.png", mime="image/png")
    except BenchError as e:
        st.error(f"{type(e).__name__}: {e}")


def render_report_tab(config):
    """Comparison report: upload results CSVs, get the verdict table"""
    files = st.file_uploader("Choose results CSV files (config,fold,run,split,cer,wer)",
                             type=["csv"], accept_multiple_files=True, key="report_upload")
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        alpha = st.number_input("alpha", min_value=0.0001, max_value=0.5, value=config["alpha"], format="%.4f")
    with col2:
        n_comparisons = st.number_input("Comparisons", min_value=1, value=config["n_comparisons"], step=1)
    with col3:
        pair_on = st.selectbox("Pair on", [p.value for p in PairOn])
    with col4:
        split = st.selectbox("Split", [s.value for s in SplitView])

    if not files:
        st.info("Upload the baseline and at least one other config.")
        return

    try:
        results = []
        for file in files:
            results.extend(read_results(file))
        spec = ExperimentSpec(presets=[], alpha=float(alpha), n_comparisons=int(n_comparisons),
                              pair_on=PairOn(pair_on), split=SplitView(split))
        with st.spinner("Running signed-rank tests..."):
            report = compare_results(results, spec)
    except BenchError as e:
        st.error(f"{type(e).__name__}: {e}")
        return

    summary = describe_verdicts(report.verdicts)
    cols = st.columns(2)
    for col, metric in zip(cols, ["cer", "wer"]):
        with col:
            counts = summary[metric]
            st.metric(f"{metric.upper()} higher / lower / no difference",
                      f"{counts['higher']} / {counts['lower']} / {counts['no_difference']}")

    st.dataframe(report.table(), use_container_width=True, hide_index=True)
    st.download_button("Download verdicts CSV", report.verdict_frame().to_csv(index=False),
                       file_name="verdicts.csv", mime="text/csv")
    with st.expander("Text report"):
        st.code(report.text)


def main():
    st.title("stenobench")
    config = BenchConfig.load_config()
    tabs = st.tabs(["Augmentation preview", "Comparison report"])
    with tabs[0]:
        render_preview_tab(config)
    with tabs[1]:
        render_report_tab(config)


if __name__ == "__main__":
    main()
