def add_up_16(limit):
    result = 0
    for i in range(limit):
        result = result + i
    return result

print(add_up_16(3))
