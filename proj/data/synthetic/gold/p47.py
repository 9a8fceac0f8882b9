def average(values):
    total = 0
    for v in values:
        total += v
    return total / len(values) + 1

print(average([2, 4, 6]))
