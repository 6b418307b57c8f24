import hashlib
import sys
from functools import wraps


def progress_bar(prefix='', decimals=1, length=50, fill='█', end="\r", stream=None):
    '''
    Decorates a generator function that yields its completed fraction in [0, 1]. The bar is
    drawn on stderr so that stdout stays reserved for data. The generator's return value is
    passed through as the return value of the decorated function.
    '''
    def decorator(func):

        @wraps(func)
        def decorated(*args, **kwargs):
            out = stream if stream is not None else sys.stderr
            progress_generator = func(*args, **kwargs)
            try:
                while True:
                    progress = next(progress_generator)
                    percent = (f"{100*progress:.{decimals}f}")
                    filled = int(length * progress)
                    bar = fill * filled + '-' * (length - filled)

                    print(f"{prefix} |{bar}| {percent}%", end=end, file=out)

            except StopIteration as result:
                print(file=out)
                return result.value

        return decorated
    return decorator


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def short_hash(text, digits=16):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:digits]


def parse_float_list(text):
    '''
    "1,2.5, 3" -> [1.0, 2.5, 3.0]
    '''
    return [float(v) for v in text.split(",") if v.strip()]
