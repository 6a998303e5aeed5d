from enum import EnumMeta, Enum

DAYS_PER_YEAR = 251
FORMAT_VERSION = 1
CSV_FLOAT_FORMAT = "%.12e"


class TableColumnsMeta(EnumMeta):
    def __new__(mcs, cls, bases, classdict):
        enum_class = super().__new__(mcs, cls, bases, classdict)
        for index, member in enumerate(enum_class):
            member._index = index
        return enum_class


class TableColumns(Enum, metaclass=TableColumnsMeta):
    def __init__(self, name, dtype):
        self._name = name
        self._dtype = dtype

    @property
    def name(self):
        return self._name

    @property
    def dtype(self):
        return self._dtype

    @property
    def index(self):
        return self._index

    @classmethod
    def get_all_names(cls):
        return [member.name for member in cls]

    @classmethod
    def dtypes(cls):
        return {member.name: member.dtype for member in cls}


class SurfaceColumns(TableColumns, metaclass=TableColumnsMeta):
    T_DAYS = ("t_days", float)
    S = ("S", float)
    MEAN = ("mean", float)
    VARIANCE = ("variance", float)


class PriceInputColumns(TableColumns, metaclass=TableColumnsMeta):
    DATE = ("date", str)
    SPOT = ("spot", float)
    PRICE = ("price", float)
    STRIKE = ("strike", float)
    MATURITY_DAYS = ("maturity_days", float)
    RATE = ("rate", float)


class ImpliedVolInputColumns(TableColumns, metaclass=TableColumnsMeta):
    DATE = ("date", str)
    IMPLIED_VOL = ("implied_vol", float)


class DensityColumns(TableColumns, metaclass=TableColumnsMeta):
    VOL = ("vol", float)
    FITTED_DENSITY = ("fitted_density", float)
    HISTOGRAM_DENSITY = ("histogram_density", float)


class MarketComparisonColumns(TableColumns, metaclass=TableColumnsMeta):
    DATE = ("date", str)
    T_DAYS = ("t_days", float)
    S = ("S", float)
    MARKET = ("market", float)
    MEAN = ("mean", float)
    STD = ("std", float)
    LOWER = ("lower", float)
    UPPER = ("upper", float)
    REFERENCE = ("reference", float)
    INSIDE_BAND = ("inside_band", bool)


class BenchmarkColumns(TableColumns, metaclass=TableColumnsMeta):
    MODEL = ("model", int)
    SIGMA_00 = ("sigma_00", float)
    SIGMA_10 = ("sigma_10", float)
    SIGMA_01 = ("sigma_01", float)
    MEAN_MAX_ERROR = ("mean_max_abs_error", float)
    MEAN_MEAN_ERROR = ("mean_mean_abs_error", float)
    MEAN_NEAR_STRIKE_ERROR = ("mean_near_strike_abs_error", float)
    VARIANCE_MAX_ERROR = ("variance_max_abs_error", float)
    VARIANCE_MEAN_ERROR = ("variance_mean_abs_error", float)
    VARIANCE_NEAR_STRIKE_ERROR = ("variance_near_strike_abs_error", float)
    RESIDUAL = ("projection_residual", float)
    HIGH_SECONDS = ("high_fidelity_seconds", float)
    BIFID_SECONDS = ("bifidelity_seconds", float)
    SPEEDUP = ("speedup", float)


WALL_TIME_COLUMNS = (
    BenchmarkColumns.HIGH_SECONDS.name,
    BenchmarkColumns.BIFID_SECONDS.name,
    BenchmarkColumns.SPEEDUP.name,
)
