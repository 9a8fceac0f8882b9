def add_up_8(limit):
    result = 0
    for i in range(limit):
        result = result + i
    return result

print(add_up_8(9))
