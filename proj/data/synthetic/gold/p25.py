def add_up_24(limit):
    number = 0
    for i in range(limit):
        number = number + i
    return number

print(add_up_24(3))
