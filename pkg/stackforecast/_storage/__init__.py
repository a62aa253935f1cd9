from .charts import importance_chart, variant_boxplot
from .csv_io import (
    PANEL_PREFIX,
    SERIES_PREFIX,
    read_data_dir,
    read_panel_csv,
    write_frame,
    write_panel_csv,
    write_series_csv,
)
from .locks import output_lock
