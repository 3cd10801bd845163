class BcsError(Exception):
    eng: str
    ru: str

    def __init__(self, eng: str, ru: str) -> None:
        self.eng = eng
        self.ru = ru
        super().__init__(eng)


class ConfigurationError(BcsError):
    """Errors in user input: model files, grids, overrides, output paths"""


class NumericalError(BcsError):
    """Errors raised by solvers on valid input"""


class ConfigNotReadable(ConfigurationError):
    def __init__(self, path: str, reason: str):
        super().__init__(
            f"Model config {path} cannot be read: {reason}",
            f"Не удалось прочитать конфигурацию модели {path}: {reason}",
        )


class InvalidDimension(ConfigurationError):
    def __init__(self, dimension: int):
        super().__init__(
            f"Dimension {dimension} is not supported, expected 1, 2 or 3",
            f"Размерность {dimension} не поддерживается, ожидается 1, 2 или 3",
        )


class InvalidBandParameter(ConfigurationError):
    def __init__(self, band: int, name: str, value: float):
        super().__init__(
            f"Band {band}: {name}={value} must be positive",
            f"Зона {band}: значение {name}={value} должно быть положительным",
        )


class AsymmetricInteraction(ConfigurationError):
    def __init__(self, pair: tuple[int, int]):
        a, b = pair
        super().__init__(
            f"Interaction V_{a}{b} differs from V_{b}{a}",
            f"Взаимодействие V_{a}{b} не совпадает с V_{b}{a}",
        )


class UnknownPotentialFamily(ConfigurationError):
    def __init__(self, family: str):
        super().__init__(
            f"Potential family {family!r} is unknown, expected 'gaussian' or 'exponential'",
            f"Неизвестное семейство потенциалов {family!r}, ожидается 'gaussian' или 'exponential'",
        )


class BandCountMismatch(ConfigurationError):
    def __init__(self, expected: int, got: int):
        super().__init__(
            f"Operation requires {expected} bands, model has {got}",
            f"Операция требует {expected} зон, в модели {got}",
        )


class InvalidChannel(ConfigurationError):
    def __init__(self, ell: int, dimension: int):
        super().__init__(
            f"Angular channel {ell} is not valid in dimension {dimension}",
            f"Угловой канал {ell} недопустим в размерности {dimension}",
        )


class InvalidCoupling(ConfigurationError):
    def __init__(self, name: str, value: float):
        super().__init__(
            f"Coupling {name}={value} is out of range",
            f"Константа связи {name}={value} вне допустимого диапазона",
        )


class InvalidGridSpec(ConfigurationError):
    def __init__(self, spec: str):
        super().__init__(
            f"Grid specification {spec!r} is not valid",
            f"Неверное описание сетки {spec!r}",
        )


class InvalidOverride(ConfigurationError):
    def __init__(self, override: str):
        super().__init__(
            f"Solver option override {override!r} is not valid",
            f"Недопустимое переопределение параметра {override!r}",
        )


class OutputNotWritable(ConfigurationError):
    def __init__(self, path: str):
        super().__init__(
            f"Output directory {path} is not writable",
            f"Нет доступа на запись в каталог {path}",
        )


class GridDegenerate(NumericalError):
    def __init__(self, band: int, temperature: float):
        super().__init__(
            f"Clustering panel of band {band} degenerates at T={temperature}: temperature exceeds the band scale",
            f"Панель сгущения зоны {band} вырождается при T={temperature}: температура больше масштаба зоны",
        )


class GridMismatch(NumericalError):
    def __init__(self, temperature: float, grid_temperature: float):
        super().__init__(
            f"Grid designed for T={grid_temperature} is too coarse for T={temperature}",
            f"Сетка, построенная для T={grid_temperature}, слишком груба для T={temperature}",
        )


class EigensolverFailure(NumericalError):
    def __init__(self, detail: str):
        super().__init__(
            f"Eigensolver did not converge: {detail}",
            f"Решатель собственных значений не сошёлся: {detail}",
        )


class BracketFailure(NumericalError):
    def __init__(self, temperature: float, min_eig: float):
        super().__init__(
            f"Lowest eigenvalue {min_eig} is still below -1 at the ceiling temperature {temperature}",
            f"Наименьшее собственное значение {min_eig} меньше -1 даже при предельной температуре {temperature}",
        )


class NoAttraction(NumericalError):
    def __init__(self, e_min: float):
        super().__init__(
            f"No band has an attractive Fermi-surface channel (min e_a = {e_min})",
            f"Ни одна зона не имеет притягивающего канала на поверхности Ферми (min e_a = {e_min})",
        )


class GapNotConverged(NumericalError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"Gap equation did not converge after {iterations} iterations, residual {residual}",
            f"Уравнение щели не сошлось за {iterations} итераций, невязка {residual}",
        )


class GapGridMismatch(NumericalError):
    def __init__(self):
        super().__init__(
            "Gap values do not match the grid layout",
            "Значения щели не соответствуют сетке",
        )


class InsufficientData(NumericalError):
    def __init__(self, branch: str, count: int, required: int):
        super().__init__(
            f"Branch {branch} has {count} usable records, at least {required} required",
            f"Для ветви {branch} есть {count} пригодных записей, требуется не менее {required}",
        )


class BranchMismatch(NumericalError):
    def __init__(self, branch: str):
        super().__init__(
            f"Records do not belong to branch {branch}",
            f"Записи не относятся к ветви {branch}",
        )


class InvalidPotentialRange(ConfigurationError):
    def __init__(self, pair: tuple[int, int], value: float):
        a, b = pair
        super().__init__(
            f"Interaction V_{a}{b}: range={value} must be positive",
            f"Взаимодействие V_{a}{b}: радиус range={value} должен быть положительным",
        )


class UnknownBand(ConfigurationError):
    def __init__(self, pair: tuple[int, int], n_bands: int):
        a, b = pair
        super().__init__(
            f"Interaction V_{a}{b} refers to a band outside 1..{n_bands}",
            f"Взаимодействие V_{a}{b} ссылается на зону вне диапазона 1..{n_bands}",
        )


class InvalidArguments(ConfigurationError):
    def __init__(self, detail: str):
        super().__init__(
            f"Invalid command line: {detail}",
            f"Неверная командная строка: {detail}",
        )


class TcNotFound(NumericalError):
    def __init__(self, lam: float, kappa: float):
        super().__init__(
            f"No critical temperature above the floor for lambda={lam}, kappa={kappa}",
            f"Критическая температура выше нижней границы не найдена для lambda={lam}, kappa={kappa}",
        )
