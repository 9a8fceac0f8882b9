def add_up_0(limit):
    item = 0
    for i in range(limit):
        item = item + i
    return item

print(add_up_0(6))
