def convert_seconds(seconds: float) -> str:
    seconds = max(0, int(round(seconds)))
    days = seconds // 86400
    hours = (seconds % 86400) // 3600
    minutes = (seconds % 3600) // 60
    seconds = seconds % 60

    if days > 0:
        return f"{days} day {hours:02}:{minutes:02}:{seconds:02}"
    else:
        return f"{hours:02}:{minutes:02}:{seconds:02}"


def remaining_seconds(elapsed_s: float, done: int, total: int) -> float:
    if done <= 0 or total <= done:
        return 0.0
    return elapsed_s / done * (total - done)


def remaining_time(elapsed_s: float, done: int, total: int) -> str:
    return convert_seconds(remaining_seconds(elapsed_s, done, total))
