from pricex.io.fixtures import merit_order_prices, simulate_bundle
from pricex.io.ingest import BUNDLE_FILES, HOURLY_FILES, ingest, parse_timestamps, split_header
from pricex.io.manifest import RunManifest
from pricex.io.results import artifact_path, read_frame, write_frame

__all__ = [
    "BUNDLE_FILES",
    "HOURLY_FILES",
    "RunManifest",
    "artifact_path",
    "ingest",
    "merit_order_prices",
    "parse_timestamps",
    "read_frame",
    "simulate_bundle",
    "split_header",
    "write_frame",
]
